#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace scrbo::gp {

using Point = std::vector<double>;

/// Matérn-5/2 covariance with one lengthscale per dimension.
double matern52(std::span<const double> x1, std::span<const double> x2, std::span<const double> lengthscales,
                double signal_var);

struct Hyperparameters {
  std::vector<double> lengthscales;
  double signal_var = 1.0;
  double noise_var = 1e-6;
};

struct Posterior {
  double mean;
  double std;
};

struct FitOptions {
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  /// Used as the first restart when present.
  std::optional<Hyperparameters> warm_start;
  std::size_t max_iterations = 60;
};

/// Zero-mean GP on centred targets. Immutable once built.
class GPModel {
 public:
  /// Builds the model for fixed hyperparameters (no fitting).
  static GPModel from_hyperparameters(std::vector<Point> xs, std::span<const double> ys, Hyperparameters hp);

  Posterior posterior(std::span<const double> x) const;
  double posterior_mean(std::span<const double> x) const { return posterior(x).mean; }

  /// Log marginal likelihood of the centred targets.
  double log_marginal_likelihood() const { return lml_; }

  std::size_t size() const { return train_x_.size(); }
  std::size_t dim() const { return hp_.lengthscales.size(); }
  const std::vector<Point>& train_x() const { return train_x_; }
  const std::vector<double>& train_y_centered() const { return train_y_; }
  double y_offset() const { return y_offset_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  const std::vector<double>& lengthscales() const { return hp_.lengthscales; }
  double signal_var() const { return hp_.signal_var; }
  double noise_var() const { return hp_.noise_var; }
  /// Diagonal jitter that was needed on top of noise_var.
  double jitter() const { return jitter_; }

 private:
  GPModel() = default;

  std::vector<Point> train_x_;
  std::vector<double> train_y_;
  double y_offset_ = 0.0;
  Hyperparameters hp_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  Eigen::MatrixXd x_;  // n x d, columns pre-divided by the lengthscales
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

/// Log marginal likelihood of centred targets under given hyperparameters.
/// Throws ill_conditioned when the jitter ladder is exhausted.
double log_marginal_likelihood(const std::vector<Point>& xs, std::span<const double> ys_centered,
                               const Hyperparameters& hp);

/// Centres ys and fits hyperparameters by maximising the marginal likelihood
/// from several starting points.
GPModel gp_fit(const std::vector<Point>& xs, std::span<const double> ys, const FitOptions& options = {});

/// Hyperparameter box, in units of the target variance where relevant.
struct Bounds {
  static constexpr double lengthscale_lo = 1e-2, lengthscale_hi = 1e2;
  static constexpr double signal_lo = 1e-4, signal_hi = 1e4;
  static constexpr double noise_lo = 1e-8, noise_hi = 1.0;
};

}  // namespace scrbo::gp
