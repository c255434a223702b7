#include "scrbo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "scrbo/error.hpp"
#include "scrbo/rng.hpp"
#include "scrbo/seriesgen.hpp"

namespace scrbo::bench {

namespace {

constexpr std::size_t kMaxNarmaAttempts = 1000;
constexpr std::uint64_t kIndividualStream = 21;

seriesgen::NarmaSeries narma_with_retry(std::size_t order, std::size_t n, std::uint64_t seed, bool saturate) {
  for (std::size_t attempt = 0; attempt < kMaxNarmaAttempts; ++attempt) {
    try {
      return seriesgen::gen_narma(order, n, attempt == 0 ? seed : derive_seed(seed, attempt), saturate);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::diverged_realization) throw;
    }
  }
  throw Error(ErrorCode::diverged_realization, "NARMA kept diverging after retries");
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string DatasetSpec::name() const {
  switch (kind) {
    case DatasetKind::mackey_glass: return "mackey_glass";
    case DatasetKind::narma: return "narma" + std::to_string(narma_order);
    case DatasetKind::csv: return path.stem().string();
  }
  return "unknown";
}

DatasetKind DatasetSpec::parse_kind(const std::string& text) {
  if (text == "mackey_glass" || text == "mg") return DatasetKind::mackey_glass;
  if (text == "narma") return DatasetKind::narma;
  if (text == "csv") return DatasetKind::csv;
  throw Error(ErrorCode::configuration, "unknown dataset kind: " + text);
}

Task BenchTask::training() const {
  return Task{{task.inputs.begin(), task.inputs.begin() + static_cast<std::ptrdiff_t>(train_rows)},
              {task.targets.begin(), task.targets.begin() + static_cast<std::ptrdiff_t>(train_rows)}};
}

BenchTask make_task(const DatasetSpec& spec, std::uint64_t seed) {
  BenchTask bt;
  bool exogenous = false;
  switch (spec.kind) {
    case DatasetKind::mackey_glass: {
      const auto raw = seriesgen::gen_mackey_glass(spec.tau, spec.n_samples, spec.noise_std, seed);
      bt.task = one_step_task(standardize(raw).series);
      break;
    }
    case DatasetKind::narma: {
      const auto nr = narma_with_retry(spec.narma_order, spec.n_samples, seed, spec.narma_saturate);
      bt.task = exogenous_task(standardize(nr.inputs).series, standardize(nr.targets).series);
      exogenous = true;
      break;
    }
    case DatasetKind::csv: {
      require(std::filesystem::exists(spec.path), ErrorCode::configuration,
              "dataset file not found: " + spec.path.string());
      const auto table = csv::read(spec.path);
      if (table.has_column("input") && table.has_column("target")) {
        TimeSeries inputs, targets;
        inputs.values = table.numeric_column("input");
        targets.values = table.numeric_column("target");
        bt.task = exogenous_task(standardize(inputs).series, standardize(targets).series);
        exogenous = true;
      } else {
        bt.task = one_step_task(standardize(read_series(spec.path)).series);
      }
      break;
    }
  }
  // Univariate tasks lose one row to the one-step shift.
  bt.train_rows = exogenous ? spec.train_samples : spec.train_samples - 1;
  require(spec.train_samples >= 2 && bt.train_rows < bt.task.size(), ErrorCode::configuration,
          "train_samples must leave a non-empty test split");
  return bt;
}

void ExperimentConfig::validate() const {
  require(!seeds.empty(), ErrorCode::configuration, "at least one seed is required");
  require(dataset.kind != DatasetKind::csv || std::filesystem::exists(dataset.path), ErrorCode::configuration,
          "dataset file not found: " + dataset.path.string());
  bo.validate();
  require(grid.size() > 0, ErrorCode::configuration, "grid is empty");
}

ComparisonReport run_bo_vs_grid(const ExperimentConfig& config, const Log& log) {
  config.validate();
  ComparisonReport report;
  const std::string name = config.dataset.name();
  for (std::uint64_t seed : config.seeds) {
    const BenchTask bt = make_task(config.dataset, seed);
    const Task train = bt.training();
    config.cv.validate(train.size());

    CachedCVObjective grid_objective(train, config.cv);
    const auto g = grid::grid_search([&](const SCRParams& p) { return grid_objective(p); }, config.grid);
    const double grid_test = holdout_nmse(g.best, bt.task, bt.train_rows, config.cv.washout);
    report.rows.push_back({name, "grid", g.table.size(), grid_test, seed, g.best_value, "exhaustive"});

    bo::BOConfig cfg = config.bo;
    cfg.seed = seed;
    cfg.target_value = g.best_value;
    CachedCVObjective bo_objective(train, config.cv);
    const auto r = bo::optimize_scr([&](const SCRParams& p) { return bo_objective(p); }, cfg);
    const double bo_test = holdout_nmse(r.best_params(), bt.task, bt.train_rows, config.cv.washout);
    report.rows.push_back({name, "bo", r.history.size(), bo_test, seed, r.best_value, bo::to_string(r.stop_reason)});
    if (log) {
      log("seed=" + std::to_string(seed) + " grid_cv=" + csv::format(g.best_value) + " grid_nmse=" +
          csv::format(grid_test) + " bo_cv=" + csv::format(r.best_value) + " bo_nmse=" + csv::format(bo_test) +
          " bo_evals=" + std::to_string(r.history.size()) + " stop=" + bo::to_string(r.stop_reason));
    }
  }
  return report;
}

std::vector<SummaryRow> summarize(const ComparisonReport& report) {
  std::vector<SummaryRow> out;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : report.rows) {
    const std::pair<std::string, std::string> key{r.dataset, r.method};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [dataset, method] : keys) {
    std::vector<double> evals, nmse, cv;
    for (const auto& r : report.rows) {
      if (r.dataset != dataset || r.method != method) continue;
      evals.push_back(static_cast<double>(r.evals));
      nmse.push_back(r.test_nmse);
      cv.push_back(r.cv_error);
    }
    out.push_back({dataset, method, evals.size(), mean(evals), sample_sd(evals), mean(nmse), sample_sd(nmse), mean(cv)});
  }
  return out;
}

csv::Table to_table(const ComparisonReport& report) {
  csv::Table t;
  t.header = {"dataset", "method", "evals", "test_nmse", "seed", "cv_error", "stop_reason"};
  for (const auto& r : report.rows) {
    t.rows.push_back({r.dataset, r.method, csv::format(static_cast<long long>(r.evals)), csv::format(r.test_nmse),
                      std::to_string(r.seed), csv::format(r.cv_error), r.stop_reason});
  }
  return t;
}

ComparisonReport comparison_from_table(const csv::Table& table) {
  ComparisonReport report;
  const std::size_t d = table.column("dataset"), m = table.column("method"), e = table.column("evals"),
                    n = table.column("test_nmse"), s = table.column("seed"), c = table.column("cv_error"),
                    r = table.column("stop_reason");
  for (const auto& row : table.rows) {
    ComparisonRow out;
    out.dataset = row.at(d);
    out.method = row.at(m);
    out.evals = static_cast<std::size_t>(csv::parse_int(row.at(e)));
    out.test_nmse = csv::parse_double(row.at(n));
    try {
      out.seed = std::stoull(row.at(s));
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse, "bad seed: " + row.at(s));
    }
    out.cv_error = csv::parse_double(row.at(c));
    out.stop_reason = row.at(r);
    report.rows.push_back(std::move(out));
  }
  return report;
}

csv::Table to_table(const std::vector<SummaryRow>& summary) {
  csv::Table t;
  t.header = {"dataset",   "method",         "repetitions",  "evals_mean", "evals_sd",
              "test_nmse_mean", "test_nmse_sd", "cv_error_mean"};
  for (const auto& r : summary) {
    t.rows.push_back({r.dataset, r.method, csv::format(static_cast<long long>(r.repetitions)), csv::format(r.evals_mean),
                      csv::format(r.evals_sd), csv::format(r.test_nmse_mean), csv::format(r.test_nmse_sd),
                      csv::format(r.cv_error_mean)});
  }
  return t;
}

std::vector<TimeSeries> synthetic_cluster_series(std::size_t per_source, std::size_t length, std::uint64_t seed) {
  std::vector<TimeSeries> out;
  for (std::size_t source = 0; source < 4; ++source) {
    for (std::size_t j = 0; j < per_source; ++j) {
      const std::uint64_t s = derive_seed(seed, source * 1000 + j);
      if (source < 2) {
        out.push_back(narma_with_retry(source == 0 ? 10 : 20, length, s, source == 1).targets);
      } else {
        // Noiseless copies differ by where on the attractor they start.
        Rng rng(s);
        seriesgen::MackeyGlassOptions opts;
        opts.burn_in = 1000.0 + static_cast<double>(rng.below(2000));
        out.push_back(seriesgen::gen_mackey_glass(source == 2 ? 17.0 : 30.0, length, 0.0, s, opts));
      }
    }
  }
  return out;
}

std::vector<std::size_t> synthetic_cluster_labels(std::size_t per_source) {
  std::vector<std::size_t> labels;
  for (std::size_t source = 0; source < 4; ++source) labels.insert(labels.end(), per_source, source);
  return labels;
}

SweepReport run_cluster_sweep(const std::vector<Task>& dataset, const SweepConfig& config, const Log& log) {
  require(!config.cluster_counts.empty(), ErrorCode::configuration, "no cluster counts given");
  const std::size_t n = dataset.size();
  for (std::size_t c : config.cluster_counts) require(c >= 1 && c <= n, ErrorCode::configuration, "cluster count out of range");
  SweepReport report;
  const double dn = static_cast<double>(n);

  std::optional<SweepRow> global;
  for (std::size_t c : config.cluster_counts) {
    cluster::ClusterConfig cfg = config.cluster;
    cfg.clusters = c;
    auto state = cluster::fit_clusters(dataset, cfg);
    const SweepRow row{"clusters", c, cluster::stopping_metric(state.loss_matrix) / dn, state.evaluations};
    if (log) log("clusters=" + std::to_string(c) + " mean_error=" + csv::format(row.mean_error));
    if (c == 1) global = SweepRow{"global", 1, row.mean_error, row.evaluations};
    report.rows.push_back(row);
    report.states.push_back(std::move(state));
  }
  if (!global) {
    cluster::ClusterConfig cfg = config.cluster;
    cfg.clusters = 1;
    const auto state = cluster::fit_clusters(dataset, cfg);
    global = SweepRow{"global", 1, cluster::stopping_metric(state.loss_matrix) / dn, state.evaluations};
  }
  report.rows.push_back(*global);

  double total = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bo::BOConfig cfg = config.cluster.bo;
    cfg.max_evals = std::max(config.individual_evals, cfg.n_init);
    cfg.target_value.reset();
    cfg.seed = derive_seed(derive_seed(config.cluster.seed, kIndividualStream), i);
    CachedCVObjective objective(dataset[i], config.cluster.cv);
    const auto r = bo::optimize_scr([&](const SCRParams& p) { return objective(p); }, cfg);
    total += r.best_value;
    evals += r.history.size();
  }
  report.rows.push_back({"individual", n, total / dn, evals});
  if (log) log("individual mean_error=" + csv::format(total / dn));
  return report;
}

csv::Table to_table(const SweepReport& report) {
  csv::Table t;
  t.header = {"model", "clusters", "mean_error", "evaluations"};
  for (const auto& r : report.rows) {
    t.rows.push_back({r.model, csv::format(static_cast<long long>(r.clusters)), csv::format(r.mean_error),
                      csv::format(static_cast<long long>(r.evaluations))});
  }
  return t;
}

void write_series(const std::filesystem::path& path, const TimeSeries& series) {
  csv::Table t;
  t.header = {"t", "value"};
  for (std::size_t i = 0; i < series.size(); ++i)
    t.rows.push_back({csv::format(static_cast<double>(i) * series.dt), csv::format(series.values[i])});
  csv::write(path, t);
}

void write_exogenous(const std::filesystem::path& path, const TimeSeries& inputs, const TimeSeries& targets) {
  require(inputs.size() == targets.size(), ErrorCode::shape, "inputs and targets differ in length");
  csv::Table t;
  t.header = {"t", "input", "target"};
  for (std::size_t i = 0; i < inputs.size(); ++i)
    t.rows.push_back({csv::format(static_cast<long long>(i)), csv::format(inputs.values[i]), csv::format(targets.values[i])});
  csv::write(path, t);
}

TimeSeries read_series(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  TimeSeries s;
  if (t.has_column("value")) {
    s.values = t.numeric_column("value");
  } else if (t.header.size() == 1) {
    s.values = t.numeric_column(t.header.front());
  } else {
    throw Error(ErrorCode::parse, path.string() + ": expected a 'value' column");
  }
  if (t.has_column("t") && s.size() >= 2) {
    const auto times = t.numeric_column("t");
    s.dt = times[1] - times[0];
  }
  s.validate();
  return s;
}

std::string params_to_kv(const SCRParams& p) {
  return "n_nodes=" + std::to_string(p.n_nodes) + "\nw_in=" + csv::format(p.w_in) + "\nw=" + csv::format(p.w) +
         "\nlambda=" + csv::format(p.lambda) + "\n";
}

void write_cluster_outputs(const std::filesystem::path& dir, const cluster::ClusterState& state,
                           const std::vector<std::string>& names) {
  require(names.size() == state.memberships.size(), ErrorCode::shape, "one name per series required");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create " + dir.string());

  csv::Table m;
  m.header = {"series"};
  for (std::size_t c = 0; c < state.cluster_params.size(); ++c) m.header.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<std::string> row{names[i]};
    for (double v : state.memberships[i]) row.push_back(csv::format(v));
    m.rows.push_back(std::move(row));
  }
  csv::write(dir / "memberships.csv", m);

  csv::Table e;
  e.header = {"iteration", "e"};
  for (std::size_t l = 0; l < state.e_history.size(); ++l)
    e.rows.push_back({csv::format(static_cast<long long>(l)), csv::format(state.e_history[l])});
  csv::write(dir / "e_history.csv", e);

  std::ofstream out(dir / "clusters.txt");
  require(static_cast<bool>(out), ErrorCode::io, "cannot write clusters.txt");
  out << "clusters=" << state.cluster_params.size() << "\niteration=" << state.iteration << "\n";
  for (std::size_t c = 0; c < state.cluster_params.size(); ++c) {
    std::string kv = params_to_kv(state.cluster_params[c]);
    std::size_t pos = 0;
    while (pos < kv.size()) {
      const std::size_t end = kv.find('\n', pos);
      out << "cluster." << c << "." << kv.substr(pos, end - pos) << "\n";
      pos = end + 1;
    }
  }
  require(static_cast<bool>(out), ErrorCode::io, "cannot write clusters.txt");
}

}  // namespace scrbo::bench
