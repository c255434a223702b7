#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scrbo/bayesopt.hpp"
#include "scrbo/clustering.hpp"
#include "scrbo/csv.hpp"
#include "scrbo/gridsearch.hpp"
#include "scrbo/scr.hpp"
#include "scrbo/timeseries.hpp"

namespace scrbo::bench {

using Log = std::function<void(const std::string&)>;

enum class DatasetKind { mackey_glass, narma, csv };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::mackey_glass;
  double tau = 30.0;
  double noise_std = 0.05;
  std::size_t narma_order = 10;
  bool narma_saturate = false;  // tanh-wrapped recurrence
  std::size_t n_samples = 1500;
  /// Samples in the training/validation part; the rest is the test split.
  std::size_t train_samples = 1000;
  std::filesystem::path path;  // csv only

  std::string name() const;
  static DatasetKind parse_kind(const std::string& text);
};

/// Standardized task for one dataset realization.
struct BenchTask {
  Task task;
  std::size_t train_rows = 0;
  Task training() const;
};

/// Generated datasets are re-realized per seed (NARMA retries on divergence);
/// CSV datasets ignore the seed.
BenchTask make_task(const DatasetSpec& spec, std::uint64_t seed);

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<std::uint64_t> seeds{0};
  CVConfig cv;
  bo::BOConfig bo;
  grid::GridSpec grid = grid::GridSpec::standard();

  std::size_t repetitions() const { return seeds.size(); }
  void validate() const;
};

struct ComparisonRow {
  std::string dataset;
  std::string method;
  std::size_t evals = 0;
  double test_nmse = 0.0;
  std::uint64_t seed = 0;
  double cv_error = 0.0;
  std::string stop_reason;

  bool operator==(const ComparisonRow&) const = default;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  bool operator==(const ComparisonReport&) const = default;
};

/// Per repetition: grid search, then BO stopped at the grid's best CV error;
/// both best settings are scored on the test split.
ComparisonReport run_bo_vs_grid(const ExperimentConfig& config, const Log& log = {});

struct SummaryRow {
  std::string dataset;
  std::string method;
  std::size_t repetitions = 0;
  double evals_mean = 0.0, evals_sd = 0.0;
  double test_nmse_mean = 0.0, test_nmse_sd = 0.0;
  double cv_error_mean = 0.0;
};

/// Means and sample standard deviations per (dataset, method).
std::vector<SummaryRow> summarize(const ComparisonReport& report);

csv::Table to_table(const ComparisonReport& report);
ComparisonReport comparison_from_table(const csv::Table& table);
csv::Table to_table(const std::vector<SummaryRow>& summary);

/// 4 sources (NARMA-10, NARMA-20, MG tau=17, MG tau=30), per_source series each.
std::vector<TimeSeries> synthetic_cluster_series(std::size_t per_source, std::size_t length, std::uint64_t seed);
/// Source index of each series from synthetic_cluster_series.
std::vector<std::size_t> synthetic_cluster_labels(std::size_t per_source);

struct SweepConfig {
  std::vector<std::size_t> cluster_counts{1, 2, 3, 4, 6};
  cluster::ClusterConfig cluster;
  std::size_t individual_evals = 75;
};

struct SweepRow {
  std::string model;  // clusters | global | individual
  std::size_t clusters = 0;
  double mean_error = 0.0;
  std::size_t evaluations = 0;
  bool operator==(const SweepRow&) const = default;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Final state for each entry of cluster_counts.
  std::vector<cluster::ClusterState> states;
};

/// Runs fit_clusters for every count plus the one-global-model and
/// one-model-per-series references. Error is e_l / n.
SweepReport run_cluster_sweep(const std::vector<Task>& dataset, const SweepConfig& config, const Log& log = {});

csv::Table to_table(const SweepReport& report);

/// Series files: a "value" column, or "input" and "target" columns for an
/// exogenous task.
void write_series(const std::filesystem::path& path, const TimeSeries& series);
void write_exogenous(const std::filesystem::path& path, const TimeSeries& inputs, const TimeSeries& targets);
TimeSeries read_series(const std::filesystem::path& path);

/// Outputs of a clustering run: memberships.csv, e_history.csv, clusters.txt.
void write_cluster_outputs(const std::filesystem::path& dir, const cluster::ClusterState& state,
                           const std::vector<std::string>& names);

std::string params_to_kv(const SCRParams& params);

}  // namespace scrbo::bench
