#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scrbo/timeseries.hpp"

namespace scrbo {

/// The four tunable SCR hyperparameters.
struct SCRParams {
  std::size_t n_nodes = 100;
  double w_in = 0.5;    // input weight magnitude, [0, 1]
  double w = 0.5;       // cyclic weight, [0, 1]
  double lambda = 1e-6; // ridge regularizer, >= 0

  void validate() const;
  friend bool operator==(const SCRParams&, const SCRParams&) = default;
};

std::string to_string(const SCRParams& params);

/// Decimal digits of pi after the decimal point: "14159265...".
std::string pi_fraction_digits(std::size_t count);

/// +1 where the matching digit of pi (1-based after the point) is >= 5, else -1.
std::vector<double> input_signs(std::size_t n_nodes);

/// Reservoir of n_nodes units connected in a single cycle of weight w. The
/// recurrence W x is a cyclic shift scaled by w; W is never stored densely.
class SCRModel {
 public:
  explicit SCRModel(const SCRParams& params);

  const SCRParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.n_nodes; }
  std::span<const double> input_signs() const noexcept { return signs_; }

 private:
  SCRParams params_;
  std::vector<double> signs_;
};

SCRModel build_scr(const SCRParams& params);

/// Reservoir states, T rows by N columns. Storage is node-major so that one
/// node's trajectory is contiguous.
class StateMatrix {
 public:
  StateMatrix(std::size_t steps, std::size_t nodes) : steps_(steps), nodes_(nodes), data_(steps * nodes) {}

  std::size_t rows() const noexcept { return steps_; }
  std::size_t cols() const noexcept { return nodes_; }

  double operator()(std::size_t t, std::size_t node) const { return data_[node * steps_ + t]; }
  double& operator()(std::size_t t, std::size_t node) { return data_[node * steps_ + t]; }

  std::span<const double> node(std::size_t n) const { return {data_.data() + n * steps_, steps_}; }
  std::vector<double> row(std::size_t t) const;

 private:
  std::size_t steps_;
  std::size_t nodes_;
  std::vector<double> data_;
};

/// x(t) = tanh(W_in [1; s(t)] + W x(t-1)), starting from x0 (zeros if empty).
StateMatrix run_reservoir(const SCRModel& model, std::span<const double> inputs, std::span<const double> x0 = {});

/// Linear readout over [1; x(t)], bias first.
struct Readout {
  std::vector<double> weights;
  double bias() const { return weights.front(); }
};

/// Ridge solution of sum_t w_t (y_t - [1; x_t]' W)^2 + lambda |W|^2. The bias
/// is penalised like every other coefficient.
Readout fit_readout(const StateMatrix& states, std::span<const double> targets, double lambda,
                    std::span<const double> sample_weights = {});

/// In-sample predictions [1; x(t)]' W for every row.
std::vector<double> predict_states(const StateMatrix& states, const Readout& readout);

TimeSeries predict(const SCRModel& model, const Readout& readout, std::span<const double> inputs,
                   std::span<const double> x0 = {});

/// sum (y - yhat)^2 / sum (y - mean(y))^2
double nmse(std::span<const double> targets, std::span<const double> predictions);

/// Aligned input/target sequences for one-step-ahead prediction.
struct Task {
  std::vector<double> inputs;
  std::vector<double> targets;
  std::size_t size() const noexcept { return inputs.size(); }
};

/// inputs[t] = y(t), targets[t] = y(t+1).
Task one_step_task(const TimeSeries& series);
/// Exogenous driver and aligned targets (e.g. NARMA's s(k) and y(k+1)).
Task exogenous_task(const TimeSeries& inputs, const TimeSeries& targets);

struct CVConfig {
  std::size_t k_folds = 5;
  std::size_t washout = 100;
  void validate(std::size_t series_length) const;
};

/// Symmetric ridge system accumulated from sufficient statistics.
class NormalEquations {
 public:
  explicit NormalEquations(std::size_t dim) : gram_(Eigen::MatrixXd::Zero(dim, dim)), rhs_(Eigen::VectorXd::Zero(dim)) {}

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rhs_.size()); }
  void add(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double scale);
  /// Throws ErrorCode::singular_system for a rank-deficient system at lambda = 0.
  Readout solve(double lambda) const;

  /// Data part A'D(y - A w) of the normal-equation residual, evaluated from
  /// the original rows rather than the accumulated Gram matrix.
  using DataResidual = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  /// solve() followed by `steps` rounds of iterative refinement. Forming the
  /// Gram matrix squares the condition number; refining against row residuals
  /// recovers the accuracy of an orthogonal solve at small lambda.
  Readout solve(double lambda, const DataResidual& data_residual, int steps = 2) const;

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd rhs_;
};

/// Post-washout indices of one series split into K contiguous blocks, with
/// per-block Gram matrices of [1; x(t)] and right-hand sides.
class FoldStatistics {
 public:
  FoldStatistics(const StateMatrix& states, std::span<const double> targets, const CVConfig& cv);

  std::size_t folds() const noexcept { return begin_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t block_begin(std::size_t k) const { return begin_[k]; }
  std::size_t block_end(std::size_t k) const { return end_[k]; }

  /// Adds scale times the training statistics of fold k (all blocks but k).
  void add_training(std::size_t fold, double scale, NormalEquations& system) const;
  /// Adds scale times sum over the training rows of fold k of
  /// [1; x_t](y_t - [1; x_t]' w) to out.
  void add_training_residual(std::size_t fold, double scale, const Eigen::VectorXd& w, Eigen::VectorXd& out) const;
  /// Squared error summed over block k.
  double held_out_sse(std::size_t fold, const Readout& readout) const;

 private:
  const StateMatrix* states_;
  std::span<const double> targets_;
  std::size_t dim_;
  std::vector<std::size_t> begin_;
  std::vector<std::size_t> end_;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::VectorXd> rhs_;
};

/// Contiguous equal-sized blocks over [washout, length): block k covers
/// [washout + k*M/K, washout + (k+1)*M/K) with M = length - washout.
std::vector<std::pair<std::size_t, std::size_t>> fold_blocks(std::size_t length, const CVConfig& cv);

/// K-fold objective: mean over folds of the held-out squared error of a
/// readout trained on the other folds. States are computed once over the
/// whole task.
double cv_objective(const SCRParams& params, const Task& task, const CVConfig& cv);

/// cv_objective with the reservoir states and block statistics of the last
/// (N, w_in, w) cached, so that sweeping lambda reuses them. Not thread-safe.
class CachedCVObjective {
 public:
  CachedCVObjective(Task task, CVConfig cv) : task_(std::move(task)), cv_(cv) {}
  double operator()(const SCRParams& params);
  const Task& task() const noexcept { return task_; }

 private:
  Task task_;
  CVConfig cv_;
  std::optional<SCRParams> key_;
  std::unique_ptr<StateMatrix> states_;
  std::unique_ptr<FoldStatistics> stats_;
};

/// Fits a readout on rows [washout, train_rows) and scores one-step
/// predictions on rows [train_rows, end) by NMSE. The reservoir runs over the
/// whole task in one pass, so test states continue from training.
double holdout_nmse(const SCRParams& params, const Task& task, std::size_t train_rows, std::size_t washout);

}  // namespace scrbo
