#pragma once

#include <cstdint>
#include <vector>

#include "scrbo/bayesopt.hpp"
#include "scrbo/scr.hpp"
#include "scrbo/timeseries.hpp"

namespace scrbo::cluster {

/// Row per series, column per cluster.
using Matrix = std::vector<std::vector<double>>;

/// Row-wise softmax of the negated losses.
Matrix memberships(const Matrix& losses);

/// Sum over series of the smallest loss in the row.
double stopping_metric(const Matrix& losses);

/// Standardizes each series and turns it into a one-step task.
std::vector<Task> prepare_dataset(const std::vector<TimeSeries>& series);

/// Per-series cross-validated losses of one reservoir whose readout is shared
/// by the whole dataset: in every fold a single ridge fit is made on the
/// union of all series, each weighted by weights[i] / sum(weights).
std::vector<double> shared_readout_losses(const SCRParams& params, const std::vector<Task>& dataset,
                                          std::span<const double> weights, const CVConfig& cv);

/// sum_i weights[i] * f_i(params) under the shared readout.
double weighted_cluster_objective(const SCRParams& params, const std::vector<Task>& dataset,
                                  std::span<const double> weights, const CVConfig& cv);

struct ClusterConfig {
  std::size_t clusters = 1;
  bo::BOConfig bo = default_bo();
  CVConfig cv;
  std::size_t round_budget = 25;
  std::size_t max_alternations = 20;
  std::uint64_t seed = 0;

  static bo::BOConfig default_bo() {
    bo::BOConfig c;
    c.n_init = 10;
    return c;
  }
};

struct ClusterState {
  std::vector<SCRParams> cluster_params;
  Matrix loss_matrix;
  Matrix memberships;
  std::size_t iteration = 0;
  /// e_l for every iteration executed, including the rejected last one.
  std::vector<double> e_history;
  std::size_t evaluations = 0;
};

ClusterState fit_clusters(const std::vector<Task>& dataset, const ClusterConfig& config);

/// Loss matrix for fixed cluster parameters; column c uses the readout
/// weights in column c of `weights`.
Matrix loss_matrix(const std::vector<Task>& dataset, const std::vector<SCRParams>& params, const Matrix& weights,
                   const CVConfig& cv);

}  // namespace scrbo::cluster
