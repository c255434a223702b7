#include "scrbo/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "scrbo/error.hpp"
#include "scrbo/rng.hpp"

namespace scrbo::cluster {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kRoundStream = 12;

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = m[i][c];
  return v;
}

}  // namespace

Matrix memberships(const Matrix& losses) {
  Matrix out(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const auto& row = losses[i];
    require(!row.empty(), ErrorCode::shape, "memberships: empty loss row");
    const double lo = *std::min_element(row.begin(), row.end());
    out[i].resize(row.size());
    double total = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      require(std::isfinite(row[c]), ErrorCode::invalid_argument, "memberships: non-finite loss");
      out[i][c] = std::exp(-(row[c] - lo));
      total += out[i][c];
    }
    for (double& m : out[i]) m /= total;
  }
  return out;
}

double stopping_metric(const Matrix& losses) {
  double e = 0.0;
  for (const auto& row : losses) {
    require(!row.empty(), ErrorCode::shape, "stopping_metric: empty loss row");
    e += *std::min_element(row.begin(), row.end());
  }
  return e;
}

std::vector<Task> prepare_dataset(const std::vector<TimeSeries>& series) {
  std::vector<Task> tasks;
  tasks.reserve(series.size());
  for (const auto& s : series) tasks.push_back(one_step_task(standardize(s).series));
  return tasks;
}

std::vector<double> shared_readout_losses(const SCRParams& params, const std::vector<Task>& dataset,
                                          std::span<const double> weights, const CVConfig& cv) {
  require(!dataset.empty(), ErrorCode::invalid_argument, "empty dataset");
  require(weights.size() == dataset.size(), ErrorCode::shape, "one weight per series required");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), ErrorCode::invalid_argument, "weights must be finite and nonnegative");
    total += w;
  }
  require(total > 0.0, ErrorCode::invalid_argument, "weights sum to zero");

  const auto model = build_scr(params);
  std::vector<std::unique_ptr<StateMatrix>> states;
  std::vector<std::unique_ptr<FoldStatistics>> stats;
  for (const auto& task : dataset) {
    cv.validate(task.size());
    require(task.size() == dataset.front().size(), ErrorCode::shape, "series in a dataset must have equal length");
    states.push_back(std::make_unique<StateMatrix>(run_reservoir(model, task.inputs)));
    stats.push_back(std::make_unique<FoldStatistics>(*states.back(), task.targets, cv));
  }

  std::vector<double> losses(dataset.size(), 0.0);
  const std::size_t folds = stats.front()->folds();
  for (std::size_t k = 0; k < folds; ++k) {
    NormalEquations sys(stats.front()->dim());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (weights[i] > 0.0) stats[i]->add_training(k, weights[i] / total, sys);
    }
    const Readout readout = sys.solve(params.lambda, [&](const Eigen::VectorXd& w) {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (weights[i] > 0.0) stats[i]->add_training_residual(k, weights[i] / total, w, out);
      }
      return out;
    });
    for (std::size_t i = 0; i < dataset.size(); ++i) losses[i] += stats[i]->held_out_sse(k, readout);
  }
  for (double& f : losses) f /= static_cast<double>(folds);
  return losses;
}

double weighted_cluster_objective(const SCRParams& params, const std::vector<Task>& dataset,
                                  std::span<const double> weights, const CVConfig& cv) {
  const auto f = shared_readout_losses(params, dataset, weights, cv);
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) total += weights[i] * f[i];
  return total;
}

Matrix loss_matrix(const std::vector<Task>& dataset, const std::vector<SCRParams>& params, const Matrix& weights,
                   const CVConfig& cv) {
  Matrix m(dataset.size(), std::vector<double>(params.size()));
  for (std::size_t c = 0; c < params.size(); ++c) {
    const auto f = shared_readout_losses(params[c], dataset, column(weights, c), cv);
    for (std::size_t i = 0; i < dataset.size(); ++i) m[i][c] = f[i];
  }
  return m;
}

ClusterState fit_clusters(const std::vector<Task>& dataset, const ClusterConfig& config) {
  const std::size_t n = dataset.size(), C = config.clusters;
  require(C >= 1, ErrorCode::configuration, "need at least one cluster");
  require(C <= n, ErrorCode::configuration, "more clusters than series");
  require(config.round_budget >= config.bo.n_init, ErrorCode::configuration, "round budget below n_init");
  require(config.max_alternations >= 1, ErrorCode::configuration, "max_alternations must be >= 1");

  const auto space = bo::SearchSpace::scr();
  ClusterState state;
  for (const auto& p : bo::lhs_sample(space, C, derive_seed(config.seed, kInitStream)))
    state.cluster_params.push_back(bo::to_scr_params(space.decode(p)));
  const Matrix uniform(n, std::vector<double>(C, 1.0 / static_cast<double>(n)));
  state.loss_matrix = loss_matrix(dataset, state.cluster_params, uniform, config.cv);
  state.memberships = memberships(state.loss_matrix);
  state.e_history.push_back(stopping_metric(state.loss_matrix));
  state.evaluations = C;

  ClusterState best = state;
  for (std::size_t l = 1; l <= config.max_alternations; ++l) {
    ClusterState next = state;
    next.iteration = l;
    for (std::size_t c = 0; c < C; ++c) {
      const auto weights = column(state.memberships, c);
      bo::BOConfig cfg = config.bo;
      cfg.max_evals = config.round_budget;
      cfg.target_value.reset();
      cfg.seed = derive_seed(derive_seed(config.seed, kRoundStream), l * 1000 + c);
      cfg.initial_points = {bo::from_scr_params(state.cluster_params[c])};
      const auto result = bo::optimize_scr(
          [&](const SCRParams& p) { return weighted_cluster_objective(p, dataset, weights, config.cv); }, cfg);
      next.cluster_params[c] = result.best_params();
      next.evaluations += result.history.size();
    }
    next.loss_matrix = loss_matrix(dataset, next.cluster_params, state.memberships, config.cv);
    next.memberships = memberships(next.loss_matrix);
    const double e = stopping_metric(next.loss_matrix);
    next.e_history.push_back(e);
    best.e_history = next.e_history;
    best.evaluations = next.evaluations;
    // Stop once the total validation error no longer decreases.
    if (e >= state.e_history.back()) break;
    state = next;
    best = state;
  }
  return best;
}

}  // namespace scrbo::cluster
