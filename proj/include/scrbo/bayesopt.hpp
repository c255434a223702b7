#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scrbo/gp.hpp"
#include "scrbo/scr.hpp"

namespace scrbo::bo {

using gp::Point;

enum class Kind { integer, continuous };
enum class Scale { linear, log };

struct Dimension {
  std::string name;
  Kind kind = Kind::continuous;
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;
};

/// Box of named dimensions; optimization happens in the unit cube.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<Dimension> dims);

  /// N in [50, 200], w_in and w in (0.01, 0.95), lambda in (1e-12, 1e-2) log.
  static SearchSpace scr();

  std::size_t size() const { return dims_.size(); }
  const Dimension& operator[](std::size_t i) const { return dims_[i]; }

  /// Unit coordinate to domain value; integer dims are not rounded here.
  double to_value(std::size_t i, double unit) const;
  double to_unit(std::size_t i, double value) const;
  /// Maps a unit point to domain values with integer dims rounded.
  std::vector<double> decode(std::span<const double> unit) const;
  Point encode(std::span<const double> values) const;

 private:
  std::vector<Dimension> dims_;
};

/// Domain values (N, w_in, w, lambda) to reservoir parameters.
SCRParams to_scr_params(std::span<const double> values);
std::vector<double> from_scr_params(const SCRParams& params);

struct BOConfig {
  std::size_t n_init = 50;
  double kappa = 2.0;
  double epsilon = 1e-3;
  std::size_t max_evals = 1500;
  std::optional<double> target_value;
  std::uint64_t seed = 0;
  std::size_t gp_restarts = 5;
  /// GP hyperparameters are re-optimized after every evaluation up to this
  /// many observations. Past it they are re-optimized once the history has
  /// grown by refit_growth since the last optimization; in between the GP is
  /// refactored on the new data with the previous hyperparameters.
  std::size_t refit_every_until = 200;
  double refit_growth = 0.25;
  /// Evaluated before the Latin hypercube points, in domain values.
  std::vector<std::vector<double>> initial_points;

  void validate() const;
};

enum class StopReason { converged, budget, target_reached };
std::string to_string(StopReason reason);
StopReason parse_stop_reason(const std::string& text);

struct Evaluation {
  Point unit;                  // what the GP sees
  std::vector<double> values;  // decoded, integer dims rounded
  double value = 0.0;          // penalty when failed
  std::size_t index = 0;
  bool failed = false;
};

struct BOResult {
  std::vector<double> best_values;
  double best_value = 0.0;
  std::size_t best_index = 0;
  std::vector<Evaluation> history;
  StopReason stop_reason = StopReason::budget;

  SCRParams best_params() const { return to_scr_params(best_values); }
};

/// Latin hypercube design in the unit cube.
std::vector<Point> lhs_sample(const SearchSpace& space, std::size_t n, std::uint64_t seed);

double lcb(const gp::GPModel& model, std::span<const double> x, double kappa);

struct AcquisitionOptions {
  std::size_t candidates = 2048;
  std::size_t refine = 8;
  double initial_step = 0.05;
  double min_step = 1e-4;
};

/// Approximate LCB minimizer over the unit cube.
Point acquire_next(const gp::GPModel& model, const SearchSpace& space, double kappa, std::uint64_t seed,
                   const AcquisitionOptions& options = {});

/// Objective over decoded domain values. Throwing or returning a non-finite
/// value marks the evaluation as failed.
using Objective = std::function<double(std::span<const double> values)>;

BOResult optimize(const Objective& objective, const SearchSpace& space, const BOConfig& config);

/// BO over the reservoir search space.
BOResult optimize_scr(const std::function<double(const SCRParams&)>& objective, const BOConfig& config);

}  // namespace scrbo::bo
