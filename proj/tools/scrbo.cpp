// Command-line front end: series generation, light-curve preprocessing,
// single optimizations and the benchmark protocols.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scrbo/bench.hpp"
#include "scrbo/error.hpp"
#include "scrbo/lightcurve.hpp"
#include "scrbo/seriesgen.hpp"

namespace fs = std::filesystem;
using namespace scrbo;

namespace {

struct DatasetArgs {
  std::string kind = "mackey_glass";
  std::string path;
  bench::DatasetSpec spec;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--dataset", kind, "mackey_glass | narma | csv")->capture_default_str();
    app->add_option("--file", path, "series CSV for --dataset csv");
    app->add_option("--tau", spec.tau, "Mackey-Glass delay")->capture_default_str();
    app->add_option("--noise", spec.noise_std, "Mackey-Glass observation noise std")->capture_default_str();
    app->add_option("--narma-order", spec.narma_order)->capture_default_str();
    app->add_flag("--narma-saturate", spec.narma_saturate, "tanh-wrapped NARMA recurrence");
    app->add_option("--samples", spec.n_samples, "total samples")->capture_default_str();
    app->add_option("--train-samples", spec.train_samples, "samples before the test split")->capture_default_str();
  }

  bench::DatasetSpec resolve() const {
    bench::DatasetSpec s = spec;
    s.kind = bench::DatasetSpec::parse_kind(kind);
    s.path = path;
    if (s.kind == bench::DatasetKind::csv) {
      require(!path.empty(), ErrorCode::configuration, "--dataset csv needs --file");
      require(fs::exists(path), ErrorCode::configuration, "dataset file not found: " + path);
    }
    return s;
  }
};

struct BOArgs {
  bo::BOConfig config;
  double target = 0.0;

  void add(CLI::App* app) {
    app->add_option("--n-init", config.n_init)->capture_default_str();
    app->add_option("--kappa", config.kappa)->capture_default_str();
    app->add_option("--epsilon", config.epsilon)->capture_default_str();
    app->add_option("--max-evals", config.max_evals)->capture_default_str();
    app->add_option("--gp-restarts", config.gp_restarts)->capture_default_str();
    app->add_option("--target", target, "stop once the objective reaches this value");
  }

  bo::BOConfig resolve(std::uint64_t seed, const CLI::App* app) const {
    bo::BOConfig c = config;
    c.seed = seed;
    if (app->count("--target") > 0) c.target_value = target;
    c.validate();
    return c;
  }
};

void add_cv(CLI::App* app, CVConfig& cv) {
  app->add_option("--k-folds", cv.k_folds)->capture_default_str();
  app->add_option("--washout", cv.washout)->capture_default_str();
}

fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("SCRBO_OUTPUT_DIR");
    dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create output directory " + dir.string());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
}

csv::Table history_table(const bo::BOResult& r) {
  csv::Table t;
  t.header = {"index", "n_nodes", "w_in", "w", "lambda", "value", "failed"};
  for (const auto& e : r.history) {
    const SCRParams p = bo::to_scr_params(e.values);
    t.rows.push_back({csv::format(static_cast<long long>(e.index)), csv::format(static_cast<long long>(p.n_nodes)),
                      csv::format(p.w_in), csv::format(p.w), csv::format(p.lambda), csv::format(e.value),
                      e.failed ? "1" : "0"});
  }
  return t;
}

csv::Table grid_table(const grid::GridResult& r) {
  csv::Table t;
  t.header = {"index", "n_nodes", "w_in", "w", "lambda", "value"};
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    const auto& p = r.table[i].params;
    t.rows.push_back({csv::format(static_cast<long long>(i)), csv::format(static_cast<long long>(p.n_nodes)),
                      csv::format(p.w_in), csv::format(p.w), csv::format(p.lambda), csv::format(r.table[i].value)});
  }
  return t;
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::size_t reps) {
  std::vector<std::uint64_t> seeds(reps);
  for (std::size_t i = 0; i < reps; ++i) seeds[i] = first + i;
  return seeds;
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

lightcurve::IrregularSeries read_light_curve(const fs::path& path) {
  const auto t = csv::read(path);
  lightcurve::IrregularSeries s;
  s.times = t.numeric_column(t.has_column("time") ? "time" : "t");
  s.values = t.numeric_column(t.has_column("mag") ? "mag" : "value");
  return s;
}

struct ClusterInputs {
  std::vector<std::string> files;
  std::size_t per_source = 3;
  std::size_t length = 750;
  std::uint64_t data_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--inputs", files, "series CSV files; omitted: synthetic 4-source dataset");
    app->add_option("--per-source", per_source, "synthetic series per source")->capture_default_str();
    app->add_option("--length", length, "synthetic series length")->capture_default_str();
    app->add_option("--data-seed", data_seed)->capture_default_str();
  }

  std::vector<TimeSeries> load(std::vector<std::string>& names) const {
    std::vector<TimeSeries> series;
    if (files.empty()) {
      series = bench::synthetic_cluster_series(per_source, length, data_seed);
      const char* sources[] = {"narma10", "narma20", "mg17", "mg30"};
      const auto labels = bench::synthetic_cluster_labels(per_source);
      for (std::size_t i = 0; i < labels.size(); ++i)
        names.push_back(std::string(sources[labels[i]]) + "_" + std::to_string(i % per_source));
    } else {
      for (const auto& f : files) {
        require(fs::exists(f), ErrorCode::configuration, "dataset file not found: " + f);
        series.push_back(bench::read_series(f));
        names.push_back(fs::path(f).stem().string());
      }
    }
    return series;
  }
};

void add_cluster_options(CLI::App* app, cluster::ClusterConfig& cfg) {
  app->add_option("--round-budget", cfg.round_budget)->capture_default_str();
  app->add_option("--max-alternations", cfg.max_alternations)->capture_default_str();
  app->add_option("--n-init", cfg.bo.n_init)->capture_default_str();
  app->add_option("--kappa", cfg.bo.kappa)->capture_default_str();
  app->add_option("--gp-restarts", cfg.bo.gp_restarts)->capture_default_str();
  app->add_option("--seed", cfg.seed)->capture_default_str();
  add_cv(app, cfg.cv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simple cycle reservoir tuning with Bayesian optimization"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_flag;
  app.add_option("--out-dir", out_flag, "output directory (default: $SCRBO_OUTPUT_DIR or .)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic series as CSV");
  std::string gen_kind = "mackey_glass", gen_out = "series.csv";
  double gen_tau = 30.0, gen_noise = 0.0;
  std::size_t gen_n = 1500, gen_order = 10;
  bool gen_saturate = false;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "mackey_glass | narma")->capture_default_str();
  gen->add_option("--tau", gen_tau)->capture_default_str();
  gen->add_option("--noise", gen_noise)->capture_default_str();
  gen->add_option("--samples", gen_n)->capture_default_str();
  gen->add_option("--order", gen_order)->capture_default_str();
  gen->add_flag("--saturate", gen_saturate);
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("-o,--output", gen_out, "file name inside the output directory")->capture_default_str();

  // prep
  auto* prep = app.add_subcommand("prep", "fold, bin and smooth an irregular light curve");
  std::string prep_in, prep_out = "prepared.csv";
  lightcurve::PrepOptions prep_opts;
  prep->add_option("--input", prep_in, "CSV with time,mag (or t,value) columns")->required();
  prep->add_option("--period", prep_opts.period)->required();
  prep->add_option("--bins", prep_opts.n_bins)->capture_default_str();
  prep->add_option("--periods", prep_opts.n_periods)->capture_default_str();
  prep->add_option("--window", prep_opts.sg_window)->capture_default_str();
  prep->add_option("--poly-order", prep_opts.sg_order)->capture_default_str();
  prep->add_option("-o,--output", prep_out)->capture_default_str();

  // optimize
  auto* opt = app.add_subcommand("optimize", "one Bayesian optimization run");
  DatasetArgs opt_data;
  BOArgs opt_bo;
  CVConfig opt_cv;
  opt_data.add(opt);
  opt_bo.add(opt);
  add_cv(opt, opt_cv);
  opt->add_option("--seed", opt_data.seed)->capture_default_str();

  // grid
  auto* grd = app.add_subcommand("grid", "exhaustive search over the 1500-cell grid");
  DatasetArgs grd_data;
  CVConfig grd_cv;
  grd_data.add(grd);
  add_cv(grd, grd_cv);
  grd->add_option("--seed", grd_data.seed)->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare", "grid search versus BO over repetitions");
  DatasetArgs cmp_data;
  BOArgs cmp_bo;
  bench::ExperimentConfig cmp_cfg;
  std::size_t cmp_reps = 30;
  std::uint64_t cmp_first = 0;
  cmp_data.add(cmp);
  cmp_bo.add(cmp);
  add_cv(cmp, cmp_cfg.cv);
  cmp->add_option("--repetitions", cmp_reps)->capture_default_str();
  cmp->add_option("--first-seed", cmp_first)->capture_default_str();

  // cluster
  auto* clu = app.add_subcommand("cluster", "fit C soft-clustered reservoirs");
  ClusterInputs clu_in;
  cluster::ClusterConfig clu_cfg;
  clu_in.add(clu);
  add_cluster_options(clu, clu_cfg);
  clu->add_option("-C,--clusters", clu_cfg.clusters)->required();

  // cluster-sweep
  auto* swp = app.add_subcommand("cluster-sweep", "cluster counts against global and per-series models");
  ClusterInputs swp_in;
  bench::SweepConfig swp_cfg;
  swp_in.add(swp);
  add_cluster_options(swp, swp_cfg.cluster);
  swp->add_option("--counts", swp_cfg.cluster_counts)->capture_default_str();
  swp->add_option("--individual-evals", swp_cfg.individual_evals)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const fs::path out = output_dir(out_flag);
    if (gen->parsed()) {
      if (gen_kind == "narma") {
        const auto s = seriesgen::gen_narma(gen_order, gen_n, gen_seed, gen_saturate);
        bench::write_exogenous(out / gen_out, s.inputs, s.targets);
      } else if (gen_kind == "mackey_glass") {
        bench::write_series(out / gen_out, seriesgen::gen_mackey_glass(gen_tau, gen_n, gen_noise, gen_seed));
      } else {
        throw Error(ErrorCode::configuration, "unknown series kind: " + gen_kind);
      }
    } else if (prep->parsed()) {
      require(fs::exists(prep_in), ErrorCode::configuration, "input file not found: " + prep_in);
      bench::write_series(out / prep_out, lightcurve::preprocess(read_light_curve(prep_in), prep_opts));
    } else if (opt->parsed()) {
      const auto bt = bench::make_task(opt_data.resolve(), opt_data.seed);
      CachedCVObjective objective(bt.training(), opt_cv);
      const auto result = bo::optimize_scr(std::ref(objective), opt_bo.resolve(opt_data.seed, opt));
      const SCRParams best = result.best_params();
      csv::write(out / "history.csv", history_table(result));
      write_text(out / "best.txt", bench::params_to_kv(best) + "cv_error=" + csv::format(result.best_value) +
                                       "\ntest_nmse=" +
                                       csv::format(holdout_nmse(best, bt.task, bt.train_rows, opt_cv.washout)) +
                                       "\nevaluations=" + std::to_string(result.history.size()) +
                                       "\nstop_reason=" + bo::to_string(result.stop_reason) + "\n");
    } else if (grd->parsed()) {
      const auto bt = bench::make_task(grd_data.resolve(), grd_data.seed);
      CachedCVObjective objective(bt.training(), grd_cv);
      const auto result = grid::grid_search(std::ref(objective), grid::GridSpec::standard());
      csv::write(out / "grid.csv", grid_table(result));
      write_text(out / "best.txt", bench::params_to_kv(result.best) + "cv_error=" + csv::format(result.best_value) +
                                       "\ntest_nmse=" +
                                       csv::format(holdout_nmse(result.best, bt.task, bt.train_rows, grd_cv.washout)) +
                                       "\n");
    } else if (cmp->parsed()) {
      cmp_cfg.dataset = cmp_data.resolve();
      cmp_cfg.seeds = seed_list(cmp_first, cmp_reps);
      cmp_cfg.bo = cmp_bo.resolve(0, cmp);
      const auto report = bench::run_bo_vs_grid(cmp_cfg, log_line);
      csv::write(out / "comparison.csv", bench::to_table(report));
      csv::write(out / "summary.csv", bench::to_table(bench::summarize(report)));
    } else if (clu->parsed()) {
      std::vector<std::string> names;
      const auto dataset = cluster::prepare_dataset(clu_in.load(names));
      const auto state = cluster::fit_clusters(dataset, clu_cfg);
      bench::write_cluster_outputs(out, state, names);
    } else if (swp->parsed()) {
      std::vector<std::string> names;
      const auto dataset = cluster::prepare_dataset(swp_in.load(names));
      const auto report = bench::run_cluster_sweep(dataset, swp_cfg, log_line);
      csv::write(out / "sweep.csv", bench::to_table(report));
    }
  } catch (const Error& e) {
    std::cerr << "error code=" << to_string(e.code()) << " message=\"" << e.what() << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error code=internal message=\"" << e.what() << "\"\n";
    return 3;
  }
  return 0;
}
