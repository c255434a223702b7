#pragma once
// Independent reference implementations shared by the unit and acceptance tests.
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "scrbo/bayesopt.hpp"
#include "scrbo/gp.hpp"
#include "scrbo/rng.hpp"
#include "scrbo/scr.hpp"

namespace oracle {

using namespace scrbo;

inline Eigen::MatrixXd dense_cycle(std::size_t n, double w) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + 1 < n; ++i) m(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = w;
  m(0, static_cast<Eigen::Index>(n - 1)) += w;
  return m;
}

inline std::vector<double> random_series(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double x = 0.0;
  for (double& e : v) {
    x = 0.8 * x + rng.normal();
    e = x;
  }
  return v;
}

/// Reference cross-validation built from dense matrices and a QR solve.
inline double reference_cv(const SCRParams& p, const Task& task, std::size_t k_folds, std::size_t washout) {
  const auto n = static_cast<Eigen::Index>(p.n_nodes);
  const auto T = static_cast<Eigen::Index>(task.size());
  const Eigen::MatrixXd W = dense_cycle(p.n_nodes, p.w);
  const auto signs = input_signs(p.n_nodes);
  Eigen::MatrixXd A(T, n + 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd pre = W * x;
    for (Eigen::Index i = 0; i < n; ++i) pre(i) += p.w_in * signs[static_cast<std::size_t>(i)] * (1.0 + task.inputs[t]);
    x = pre.array().tanh();
    A(t, 0) = 1.0;
    A.row(t).tail(n) = x.transpose();
  }
  const Eigen::Map<const Eigen::VectorXd> y(task.targets.data(), T);
  const auto M = static_cast<std::size_t>(T) - washout;
  double total = 0.0;
  for (std::size_t k = 0; k < k_folds; ++k) {
    const std::size_t lo = washout + k * M / k_folds, hi = washout + (k + 1) * M / k_folds;
    std::vector<Eigen::Index> train;
    for (std::size_t t = washout; t < static_cast<std::size_t>(T); ++t) {
      if (t < lo || t >= hi) train.push_back(static_cast<Eigen::Index>(t));
    }
    Eigen::MatrixXd At(static_cast<Eigen::Index>(train.size()) + n + 1, n + 1);
    Eigen::VectorXd yt = Eigen::VectorXd::Zero(At.rows());
    for (std::size_t r = 0; r < train.size(); ++r) {
      At.row(static_cast<Eigen::Index>(r)) = A.row(train[r]);
      yt(static_cast<Eigen::Index>(r)) = y(train[r]);
    }
    // Ridge as augmented least squares: [A; sqrt(lambda) I] w = [y; 0].
    At.bottomRows(n + 1) = std::sqrt(p.lambda) * Eigen::MatrixXd::Identity(n + 1, n + 1);
    const Eigen::VectorXd wout = At.colPivHouseholderQr().solve(yt);
    for (std::size_t t = lo; t < hi; ++t) {
      const double r = y(static_cast<Eigen::Index>(t)) - A.row(static_cast<Eigen::Index>(t)).dot(wout);
      total += r * r;
    }
  }
  return total / static_cast<double>(k_folds);
}

/// Each of the n strata of [0, 1) along `dim` holds exactly one point.
inline bool stratified(const std::vector<gp::Point>& pts, std::size_t dim) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> seen(n, 0);
  for (const auto& p : pts) {
    const auto s = static_cast<std::size_t>(std::floor(p[dim] * static_cast<double>(n)));
    if (s >= n) return false;
    ++seen[s];
  }
  return std::all_of(seen.begin(), seen.end(), [](std::size_t c) { return c == 1; });
}

/// Posterior from an explicit inverse of the training covariance.
inline gp::Posterior dense_posterior(const std::vector<gp::Point>& xs, const std::vector<double>& ys,
                                     const gp::Hyperparameters& hp, double jitter, const gp::Point& x) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = gp::matern52(xs[i], xs[j], hp.lengthscales, hp.signal_var);
  K.diagonal().array() += hp.noise_var + jitter;
  const Eigen::MatrixXd Kinv = K.inverse();
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(n);
  Eigen::VectorXd yc(n), k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yc(i) = ys[i] - mean;
    k(i) = gp::matern52(x, xs[i], hp.lengthscales, hp.signal_var);
  }
  return {mean + k.dot(Kinv * yc), std::sqrt(std::max(0.0, hp.signal_var - k.dot(Kinv * k)))};
}

/// Central-difference gradient norm of the weighted ridge loss at `weights`,
/// divided by sum_t w_t y_t^2.
inline double ridge_gradient_ratio(const StateMatrix& states, const std::vector<double>& y,
                                   const std::vector<double>& wts, double lambda, const std::vector<double>& weights) {
  const std::size_t T = states.rows(), N = states.cols();
  auto loss = [&](const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double p = w[0];
      for (std::size_t n = 0; n < N; ++n) p += w[n + 1] * states(t, n);
      s += wts[t] * (y[t] - p) * (y[t] - p);
    }
    for (double v : w) s += lambda * v * v;
    return s;
  };
  const double h = 1e-6;
  double gnorm = 0.0, scale = 0.0;
  for (std::size_t i = 0; i <= N; ++i) {
    auto wp = weights, wm = weights;
    wp[i] += h;
    wm[i] -= h;
    const double g = (loss(wp) - loss(wm)) / (2 * h);
    gnorm += g * g;
  }
  for (std::size_t t = 0; t < T; ++t) scale += wts[t] * y[t] * y[t];
  return std::sqrt(gnorm) / scale;
}

}  // namespace oracle
