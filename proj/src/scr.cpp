#include "scrbo/scr.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "scrbo/csv.hpp"
#include "scrbo/error.hpp"
#include "scrbo/kernels.hpp"

namespace scrbo {

void SCRParams::validate() const {
  require(n_nodes >= 1, ErrorCode::invalid_argument, "SCR needs at least one node");
  require(w_in >= 0.0 && w_in <= 1.0, ErrorCode::invalid_argument, "w_in must lie in [0, 1]");
  require(w >= 0.0 && w <= 1.0, ErrorCode::invalid_argument, "w must lie in [0, 1]");
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::invalid_argument, "lambda must be >= 0");
}

std::string to_string(const SCRParams& params) {
  std::ostringstream out;
  out << "N=" << params.n_nodes << " w_in=" << csv::format(params.w_in) << " w=" << csv::format(params.w)
      << " lambda=" << csv::format(params.lambda);
  return out.str();
}

namespace {

// Rabinowitz-Wagon spigot; returns "3" followed by `count` fraction digits.
std::string spigot_pi(std::size_t count) {
  const std::size_t digits = count + 1;
  const std::size_t rounds = digits + 3;  // extra rounds flush held 9s
  const std::size_t len = rounds * 10 / 3 + 2;
  std::vector<long long> a(len, 2);
  std::string out;
  out.reserve(digits + 1);
  long long nines = 0;
  long long predigit = -1;
  for (std::size_t j = 0; j < rounds; ++j) {
    long long carry = 0;
    for (std::size_t i = len; i-- > 0;) {
      const long long denom = 2 * static_cast<long long>(i) + 1;
      const long long x = 10 * a[i] + carry * static_cast<long long>(i + 1);
      a[i] = x % denom;
      carry = x / denom;
    }
    // carry now holds 10 * a[0]-derived quotient; the i = 0 term used
    // denominator 1 and multiplier 1.
    a[0] = carry % 10;
    const long long q = carry / 10;
    if (q == 9) {
      ++nines;
    } else if (q == 10) {
      out.push_back(static_cast<char>('0' + predigit + 1));
      out.append(static_cast<std::size_t>(nines), '0');
      predigit = 0;
      nines = 0;
    } else {
      if (predigit >= 0) out.push_back(static_cast<char>('0' + predigit));
      predigit = q;
      out.append(static_cast<std::size_t>(nines), '9');
      nines = 0;
    }
  }
  out.resize(digits);
  return out;
}

}  // namespace

std::string pi_fraction_digits(std::size_t count) {
  static constexpr std::size_t kCached = 2048;
  static const std::string cached = spigot_pi(kCached).substr(1);
  if (count <= kCached) return cached.substr(0, count);
  return spigot_pi(count).substr(1);
}

std::vector<double> input_signs(std::size_t n_nodes) {
  const auto digits = pi_fraction_digits(n_nodes);
  std::vector<double> signs(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) signs[i] = digits[i] >= '5' ? 1.0 : -1.0;
  return signs;
}

SCRModel::SCRModel(const SCRParams& params) : params_(params) {
  params_.validate();
  signs_ = scrbo::input_signs(params_.n_nodes);
}

SCRModel build_scr(const SCRParams& params) { return SCRModel(params); }

std::vector<double> StateMatrix::row(std::size_t t) const {
  std::vector<double> out(nodes_);
  for (std::size_t n = 0; n < nodes_; ++n) out[n] = (*this)(t, n);
  return out;
}

StateMatrix run_reservoir(const SCRModel& model, std::span<const double> inputs, std::span<const double> x0) {
  const std::size_t n = model.size();
  require(!inputs.empty(), ErrorCode::invalid_argument, "reservoir needs at least one input");
  require(x0.empty() || x0.size() == n, ErrorCode::shape, "initial state has the wrong size");

  const auto& k = kernels::active();
  const auto signs = model.input_signs();
  const double w_in = model.params().w_in;
  const double w = model.params().w;

  std::vector<double> prev(n, 0.0), drive(n), pre(n);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), prev.begin());

  StateMatrix states(inputs.size(), n);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double u = w_in * (1.0 + inputs[t]);
    for (std::size_t i = 0; i < n; ++i) drive[i] = signs[i] * u;
    k.cyclic_preactivation(drive.data(), prev.data(), w, pre.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      prev[i] = std::tanh(pre[i]);
      states(t, i) = prev[i];
    }
  }
  return states;
}

void NormalEquations::add(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double scale) {
  gram_.noalias() += scale * gram;
  rhs_.noalias() += scale * rhs;
}

namespace {

/// Factorisation of G + lambda I, reusable for several right-hand sides.
class RidgeSolver {
 public:
  RidgeSolver(const Eigen::MatrixXd& gram_upper, double lambda) {
    Eigen::MatrixXd system = gram_upper.selfadjointView<Eigen::Upper>();
    system.diagonal().array() += lambda;
    llt_.compute(system);
    if (llt_.info() == Eigen::Success) return;
    // Numerically indefinite: solve in the eigenbasis with clamped spectrum.
    eig_.compute(gram_upper.selfadjointView<Eigen::Upper>());
    spectrum_ = eig_.eigenvalues().cwiseMax(0.0).array() + lambda;
    const double top = std::max(spectrum_.maxCoeff(), 0.0);
    if (lambda == 0.0 && (top == 0.0 || spectrum_.minCoeff() <= 1e-13 * top)) {
      throw Error(ErrorCode::singular_system, "readout system is singular; use lambda > 0");
    }
    use_eig_ = true;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (!use_eig_) return llt_.solve(rhs);
    return eig_.eigenvectors() * (eig_.eigenvectors().transpose() * rhs).cwiseQuotient(spectrum_);
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_;
  Eigen::VectorXd spectrum_;
  bool use_eig_ = false;
};

Readout to_readout(const Eigen::VectorXd& solution) {
  Readout out;
  out.weights.assign(solution.data(), solution.data() + solution.size());
  for (double v : out.weights) {
    require(std::isfinite(v), ErrorCode::singular_system, "readout solution is not finite");
  }
  return out;
}

}  // namespace

Readout NormalEquations::solve(double lambda) const {
  require(lambda >= 0.0, ErrorCode::invalid_argument, "lambda must be >= 0");
  const RidgeSolver solver(gram_, lambda);
  return to_readout(solver.solve(rhs_));
}

Readout NormalEquations::solve(double lambda, const DataResidual& data_residual, int steps) const {
  require(lambda >= 0.0, ErrorCode::invalid_argument, "lambda must be >= 0");
  require(steps >= 0, ErrorCode::invalid_argument, "refinement steps must be >= 0");
  const RidgeSolver solver(gram_, lambda);
  Eigen::VectorXd w = solver.solve(rhs_);
  for (int i = 0; i < steps && w.allFinite(); ++i) {
    const Eigen::VectorXd residual = data_residual(w) - lambda * w;
    w += solver.solve(residual);
  }
  return to_readout(w);
}

namespace {

/// Gram matrix (upper triangle) and right-hand side of the design [1; x(t)]
/// over rows [begin, end), optionally weighted per row.
void accumulate_block(const StateMatrix& states, std::span<const double> targets, std::span<const double> ones,
                      std::span<const double> weights, std::size_t begin, std::size_t end, Eigen::MatrixXd& gram,
                      Eigen::VectorXd& rhs) {
  const std::size_t dim = states.cols() + 1;
  const std::size_t len = end - begin;
  gram.setZero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  rhs.setZero(static_cast<Eigen::Index>(dim));
  if (len == 0) return;

  const auto& k = kernels::active();
  auto column = [&](std::size_t c) -> const double* {
    return c == 0 ? ones.data() + begin : states.node(c - 1).data() + begin;
  };
  const double* y = targets.data() + begin;
  const double* w = weights.empty() ? nullptr : weights.data() + begin;

  for (std::size_t a = 0; a < dim; ++a) {
    const double* ca = column(a);
    for (std::size_t b = a; b < dim; ++b) {
      gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          w ? k.weighted_dot(ca, column(b), w, len) : k.dot(ca, column(b), len);
    }
    rhs(static_cast<Eigen::Index>(a)) = w ? k.weighted_dot(ca, y, w, len) : k.dot(ca, y, len);
  }
}

/// Predictions [1; x(t)]' W for rows [begin, end).
std::vector<double> predict_range(const StateMatrix& states, const Readout& readout, std::size_t begin,
                                  std::size_t end) {
  require(readout.weights.size() == states.cols() + 1, ErrorCode::shape, "readout length must be N + 1");
  const auto& k = kernels::active();
  std::vector<double> out(end - begin, readout.weights[0]);
  for (std::size_t n = 0; n < states.cols(); ++n) {
    k.axpy(readout.weights[n + 1], states.node(n).data() + begin, out.data(), out.size());
  }
  return out;
}

/// Adds scale * sum_t d_t [1; x_t](y_t - [1; x_t]' w) over rows [begin, end)
/// to out, with d_t = 1 when weights is empty.
void accumulate_residual(const StateMatrix& states, std::span<const double> targets,
                         std::span<const double> weights, std::size_t begin, std::size_t end, double scale,
                         const Eigen::VectorXd& w, Eigen::VectorXd& out) {
  if (end <= begin) return;
  const auto& k = kernels::active();
  const Readout readout{std::vector<double>(w.data(), w.data() + w.size())};
  auto r = predict_range(states, readout, begin, end);
  for (std::size_t t = 0; t < r.size(); ++t) {
    r[t] = targets[begin + t] - r[t];
    if (!weights.empty()) r[t] *= weights[begin + t];
  }
  double sum = 0.0;
  for (double v : r) sum += v;
  out(0) += scale * sum;
  for (std::size_t n = 0; n < states.cols(); ++n) {
    out(static_cast<Eigen::Index>(n + 1)) += scale * k.dot(states.node(n).data() + begin, r.data(), r.size());
  }
}

}  // namespace

Readout fit_readout(const StateMatrix& states, std::span<const double> targets, double lambda,
                    std::span<const double> sample_weights) {
  require(targets.size() == states.rows(), ErrorCode::shape, "targets and states differ in length");
  require(lambda >= 0.0, ErrorCode::invalid_argument, "lambda must be >= 0");
  if (!sample_weights.empty()) {
    require(sample_weights.size() == targets.size(), ErrorCode::shape, "sample weights have the wrong length");
    for (double v : sample_weights) require(v >= 0.0, ErrorCode::invalid_argument, "sample weights must be >= 0");
  }
  const std::vector<double> ones(states.rows(), 1.0);
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  accumulate_block(states, targets, ones, sample_weights, 0, states.rows(), gram, rhs);
  NormalEquations system(states.cols() + 1);
  system.add(gram, rhs, 1.0);
  return system.solve(lambda, [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
    accumulate_residual(states, targets, sample_weights, 0, states.rows(), 1.0, w, out);
    return out;
  });
}

std::vector<double> predict_states(const StateMatrix& states, const Readout& readout) {
  return predict_range(states, readout, 0, states.rows());
}

TimeSeries predict(const SCRModel& model, const Readout& readout, std::span<const double> inputs,
                   std::span<const double> x0) {
  require(readout.weights.size() == model.size() + 1, ErrorCode::shape, "readout length must be N + 1");
  const auto states = run_reservoir(model, inputs, x0);
  TimeSeries out;
  out.values = predict_states(states, readout);
  out.meta = "prediction";
  return out;
}

double nmse(std::span<const double> targets, std::span<const double> predictions) {
  require(targets.size() == predictions.size(), ErrorCode::shape, "targets and predictions differ in length");
  require(targets.size() >= 2, ErrorCode::invalid_argument, "NMSE needs at least 2 points");
  double mean = 0.0;
  for (double v : targets) mean += v;
  mean /= static_cast<double>(targets.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    num += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    den += (targets[i] - mean) * (targets[i] - mean);
  }
  require(den > 0.0, ErrorCode::degenerate_series, "NMSE undefined for constant targets");
  return num / den;
}

Task one_step_task(const TimeSeries& series) {
  require(series.size() >= 2, ErrorCode::invalid_argument, "one-step task needs at least 2 points");
  Task task;
  task.inputs.assign(series.values.begin(), series.values.end() - 1);
  task.targets.assign(series.values.begin() + 1, series.values.end());
  return task;
}

Task exogenous_task(const TimeSeries& inputs, const TimeSeries& targets) {
  require(inputs.size() == targets.size(), ErrorCode::shape, "inputs and targets differ in length");
  require(!inputs.values.empty(), ErrorCode::invalid_argument, "empty task");
  return Task{inputs.values, targets.values};
}

void CVConfig::validate(std::size_t series_length) const {
  require(k_folds >= 2, ErrorCode::invalid_argument, "k_folds must be >= 2");
  require(washout + k_folds <= series_length, ErrorCode::invalid_argument,
          "series too short for washout + k_folds");
}

std::vector<std::pair<std::size_t, std::size_t>> fold_blocks(std::size_t length, const CVConfig& cv) {
  cv.validate(length);
  const std::size_t usable = length - cv.washout;
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  blocks.reserve(cv.k_folds);
  for (std::size_t k = 0; k < cv.k_folds; ++k) {
    blocks.emplace_back(cv.washout + k * usable / cv.k_folds, cv.washout + (k + 1) * usable / cv.k_folds);
  }
  return blocks;
}

FoldStatistics::FoldStatistics(const StateMatrix& states, std::span<const double> targets, const CVConfig& cv)
    : states_(&states), targets_(targets), dim_(states.cols() + 1) {
  require(targets.size() == states.rows(), ErrorCode::shape, "targets and states differ in length");
  const auto blocks = fold_blocks(states.rows(), cv);
  const std::vector<double> ones(states.rows(), 1.0);
  gram_.resize(blocks.size());
  rhs_.resize(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    begin_.push_back(blocks[k].first);
    end_.push_back(blocks[k].second);
    accumulate_block(states, targets, ones, {}, blocks[k].first, blocks[k].second, gram_[k], rhs_[k]);
  }
}

void FoldStatistics::add_training(std::size_t fold, double scale, NormalEquations& system) const {
  for (std::size_t k = 0; k < gram_.size(); ++k) {
    if (k != fold) system.add(gram_[k], rhs_[k], scale);
  }
}

void FoldStatistics::add_training_residual(std::size_t fold, double scale, const Eigen::VectorXd& w,
                                           Eigen::VectorXd& out) const {
  for (std::size_t k = 0; k < begin_.size(); ++k) {
    if (k != fold) accumulate_residual(*states_, targets_, {}, begin_[k], end_[k], scale, w, out);
  }
}

double FoldStatistics::held_out_sse(std::size_t fold, const Readout& readout) const {
  const auto pred = predict_range(*states_, readout, begin_[fold], end_[fold]);
  return kernels::sq_diff_sum(targets_.subspan(begin_[fold], pred.size()), pred);
}

namespace {

double cv_from_statistics(const FoldStatistics& stats, double lambda) {
  double total = 0.0;
  for (std::size_t k = 0; k < stats.folds(); ++k) {
    NormalEquations system(stats.dim());
    stats.add_training(k, 1.0, system);
    const auto readout = system.solve(lambda, [&](const Eigen::VectorXd& w) {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
      stats.add_training_residual(k, 1.0, w, out);
      return out;
    });
    total += stats.held_out_sse(k, readout);
  }
  return total / static_cast<double>(stats.folds());
}

}  // namespace

double cv_objective(const SCRParams& params, const Task& task, const CVConfig& cv) {
  require(task.inputs.size() == task.targets.size(), ErrorCode::shape, "task inputs and targets differ in length");
  cv.validate(task.size());
  const auto model = build_scr(params);
  const auto states = run_reservoir(model, task.inputs);
  const FoldStatistics stats(states, task.targets, cv);
  return cv_from_statistics(stats, params.lambda);
}

double CachedCVObjective::operator()(const SCRParams& params) {
  params.validate();
  const bool hit = key_ && key_->n_nodes == params.n_nodes && key_->w_in == params.w_in && key_->w == params.w;
  if (!hit) {
    cv_.validate(task_.size());
    stats_.reset();
    states_ = std::make_unique<StateMatrix>(run_reservoir(build_scr(params), task_.inputs));
    stats_ = std::make_unique<FoldStatistics>(*states_, task_.targets, cv_);
    key_ = params;
  }
  return cv_from_statistics(*stats_, params.lambda);
}

double holdout_nmse(const SCRParams& params, const Task& task, std::size_t train_rows, std::size_t washout) {
  require(washout < train_rows && train_rows + 2 <= task.size(), ErrorCode::bounds,
          "holdout split does not fit the task");
  const auto states = run_reservoir(build_scr(params), task.inputs);
  const std::vector<double> ones(states.rows(), 1.0);
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  accumulate_block(states, task.targets, ones, {}, washout, train_rows, gram, rhs);
  NormalEquations system(states.cols() + 1);
  system.add(gram, rhs, 1.0);
  const auto readout = system.solve(params.lambda, [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
    accumulate_residual(states, task.targets, {}, washout, train_rows, 1.0, w, out);
    return out;
  });
  const auto pred = predict_range(states, readout, train_rows, task.size());
  return nmse(std::span<const double>(task.targets).subspan(train_rows), pred);
}

}  // namespace scrbo
