#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "scrbo/bench.hpp"
#include "scrbo/error.hpp"

using namespace scrbo;
using namespace scrbo::bench;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scrbo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.dataset.kind = DatasetKind::mackey_glass;
  cfg.dataset.tau = 17.0;
  cfg.dataset.n_samples = 400;
  cfg.dataset.train_samples = 300;
  cfg.seeds = {3};
  cfg.cv = CVConfig{3, 50};
  cfg.bo.n_init = 5;
  cfg.bo.max_evals = 12;
  cfg.bo.gp_restarts = 2;
  cfg.grid = grid::GridSpec{{20, 40}, {0.1, 0.5}, {0.5, 0.9}, {1e-8, 1e-4}};
  return cfg;
}

}  // namespace

TEST_CASE("benchmark tasks use a 1000-sample training split") {
  DatasetSpec mg;
  const auto a = make_task(mg, 1);
  CHECK(a.task.size() == 1499);
  CHECK(a.train_rows == 999);
  double mean = 0.0;
  for (double v : a.task.inputs) mean += v;
  CHECK(std::abs(mean / 1499.0) < 0.01);

  DatasetSpec narma;
  narma.kind = DatasetKind::narma;
  const auto b = make_task(narma, 1);
  CHECK(b.task.size() == 1500);
  CHECK(b.train_rows == 1000);
  CHECK(b.training().size() == 1000);
  CHECK(narma.name() == "narma10");

  DatasetSpec missing;
  missing.kind = DatasetKind::csv;
  missing.path = "/nonexistent/file.csv";
  try {
    make_task(missing, 0);
    FAIL("expected configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
  CHECK_THROWS_AS(DatasetSpec::parse_kind("weird"), Error);
}

TEST_CASE("csv datasets") {
  const auto dir = temp_dir("csvdata");
  TimeSeries s;
  for (int i = 0; i < 300; ++i) s.values.push_back(std::sin(0.1 * i) + 0.01 * i);
  write_series(dir / "s.csv", s);
  const auto back = read_series(dir / "s.csv");
  CHECK(back.values == s.values);

  DatasetSpec spec;
  spec.kind = DatasetKind::csv;
  spec.path = dir / "s.csv";
  spec.train_samples = 240;
  const auto t = make_task(spec, 0);
  CHECK(t.task.size() == 299);
  CHECK(t.train_rows == 239);
  CHECK(spec.name() == "s");

  write_exogenous(dir / "x.csv", TimeSeries{{1, 2, 3, 4}}, TimeSeries{{2, 4, 6, 9}});
  spec.path = dir / "x.csv";
  spec.train_samples = 3;
  CHECK(make_task(spec, 0).task.size() == 4);
}

TEST_CASE("report csv schema and round trip") {
  ComparisonReport empty;
  CHECK(csv::to_string(to_table(empty)) == "dataset,method,evals,test_nmse,seed,cv_error,stop_reason\n");
  ComparisonReport r;
  r.rows.push_back({"mackey_glass", "grid", 1500, 0.0334, 7, 12.25, "exhaustive"});
  r.rows.push_back({"mackey_glass", "bo", 91, 0.1 + 0.2, 7, 1.0 / 3.0, "target_reached"});
  const auto text = csv::to_string(to_table(r));
  CHECK(comparison_from_table(csv::parse(text)) == r);
}

TEST_CASE("summary uses sample standard deviations") {
  ComparisonReport r;
  r.rows.push_back({"d", "bo", 10, 0.1, 1, 1.0, "converged"});
  r.rows.push_back({"d", "bo", 20, 0.3, 2, 3.0, "converged"});
  r.rows.push_back({"d", "grid", 1500, 0.2, 1, 2.0, "exhaustive"});
  const auto s = summarize(r);
  REQUIRE(s.size() == 2);
  CHECK(s[0].method == "bo");
  CHECK(s[0].evals_mean == 15.0);
  CHECK(s[0].evals_sd == doctest::Approx(std::sqrt(50.0)));
  CHECK(s[0].test_nmse_mean == doctest::Approx(0.2));
  CHECK(s[1].evals_sd == 0.0);
}

TEST_CASE("bo versus grid on a small grid") {
  const auto cfg = small_experiment();
  const auto report = run_bo_vs_grid(cfg);
  REQUIRE(report.rows.size() == 2);
  const auto& g = report.rows[0];
  const auto& b = report.rows[1];
  CHECK(g.method == "grid");
  CHECK(g.evals == 16);
  CHECK(b.method == "bo");
  CHECK(b.evals >= cfg.bo.n_init);
  CHECK(b.evals <= cfg.bo.max_evals);
  CHECK((b.cv_error <= g.cv_error || b.stop_reason != "target_reached"));
  CHECK(g.test_nmse > 0.0);
  CHECK(b.test_nmse > 0.0);
  const auto again = run_bo_vs_grid(cfg);
  CHECK(csv::to_string(to_table(again)) == csv::to_string(to_table(report)));
}

TEST_CASE("cluster dataset and outputs") {
  const auto series = synthetic_cluster_series(2, 300, 1);
  REQUIRE(series.size() == 8);
  CHECK(synthetic_cluster_labels(2) == std::vector<std::size_t>{0, 0, 1, 1, 2, 2, 3, 3});
  for (const auto& s : series) CHECK(s.size() == 300);
  CHECK(series[4].values != series[5].values);

  cluster::ClusterState state;
  state.cluster_params = {{50, 0.1, 0.2, 1e-6}, {60, 0.3, 0.4, 1e-5}};
  state.memberships = {{0.25, 0.75}, {0.5, 0.5}};
  state.e_history = {3.0, 2.5};
  state.iteration = 1;
  const auto dir = temp_dir("clusterout");
  write_cluster_outputs(dir, state, {"a", "b"});
  const auto m = csv::read(dir / "memberships.csv");
  CHECK(m.header == std::vector<std::string>{"series", "c0", "c1"});
  CHECK(m.numeric_column("c1") == std::vector<double>{0.75, 0.5});
  CHECK(csv::read(dir / "e_history.csv").numeric_column("e") == std::vector<double>{3.0, 2.5});
  CHECK(std::filesystem::exists(dir / "clusters.txt"));
  CHECK(params_to_kv(state.cluster_params[0]) == "n_nodes=50\nw_in=0.1\nw=0.2\nlambda=1e-06\n");
}

TEST_CASE("cluster sweep references") {
  const auto ds = cluster::prepare_dataset(synthetic_cluster_series(1, 260, 2));
  SweepConfig cfg;
  cfg.cluster_counts = {1, 2};
  cfg.cluster.cv = CVConfig{3, 50};
  cfg.cluster.bo.n_init = 4;
  cfg.cluster.bo.gp_restarts = 2;
  cfg.cluster.round_budget = 6;
  cfg.cluster.max_alternations = 2;
  cfg.individual_evals = 6;
  const auto report = run_cluster_sweep(ds, cfg);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].model == "clusters");
  CHECK(report.rows[2].model == "global");
  CHECK(report.rows[2].mean_error == report.rows[0].mean_error);
  CHECK(report.rows[3].model == "individual");
  CHECK(report.rows[3].clusters == 4);
  const auto t = to_table(report);
  CHECK(t.header == std::vector<std::string>{"model", "clusters", "mean_error", "evaluations"});
}
