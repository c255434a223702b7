#include "scrbo/seriesgen.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "scrbo/error.hpp"
#include "scrbo/rng.hpp"

namespace scrbo::seriesgen {

namespace {

/// Trajectory on the integration grid t_j = j * step, with the constant
/// history for t <= 0.
class DelayBuffer {
 public:
  DelayBuffer(double history, std::size_t capacity) : history_(history) {
    values_.reserve(capacity);
    values_.push_back(history);  // x(0)
  }

  void push(double x) { values_.push_back(x); }
  double last() const { return values_.back(); }

  /// x at grid coordinate s (units of steps), cubic Lagrange through the
  /// four surrounding grid values.
  double at(double s) const {
    const double nearest = std::round(s);
    if (std::abs(s - nearest) < 1e-9) return grid(static_cast<long long>(nearest));
    const auto newest = static_cast<long long>(values_.size()) - 1;
    auto base = static_cast<long long>(std::floor(s)) - 1;
    if (base + 3 > newest) base = newest - 3;
    const double u = s - static_cast<double>(base);  // position relative to stencil start
    double result = 0.0;
    for (int i = 0; i < 4; ++i) {
      double weight = 1.0;
      for (int j = 0; j < 4; ++j) {
        if (j != i) weight *= (u - j) / static_cast<double>(i - j);
      }
      result += weight * grid(base + i);
    }
    return result;
  }

 private:
  double grid(long long j) const {
    if (j <= 0) return j == 0 ? values_.front() : history_;
    return values_[static_cast<std::size_t>(j)];
  }

  double history_;
  std::vector<double> values_;
};

double mg_rate(double x, double delayed) {
  return 0.2 * delayed / (1.0 + std::pow(delayed, 10)) - 0.1 * x;
}

}  // namespace

TimeSeries gen_mackey_glass(double tau, std::size_t n_samples, double noise_std, std::uint64_t seed,
                            const MackeyGlassOptions& options) {
  require(tau > 0.0, ErrorCode::invalid_argument, "tau must be positive");
  require(n_samples >= 1, ErrorCode::invalid_argument, "n_samples must be >= 1");
  require(noise_std >= 0.0, ErrorCode::invalid_argument, "noise_std must be >= 0");
  require(options.step > 0.0 && options.burn_in >= 0.0, ErrorCode::invalid_argument,
          "invalid integration options");

  const double h = options.step;
  const auto steps_per_sample = static_cast<std::size_t>(std::llround(options.sample_interval / h));
  require(steps_per_sample >= 1 &&
              std::abs(static_cast<double>(steps_per_sample) * h - options.sample_interval) < 1e-9,
          ErrorCode::invalid_argument, "sample interval must be a multiple of the step");
  const auto burn_steps = static_cast<std::size_t>(std::llround(options.burn_in / h));
  const std::size_t total_steps = burn_steps + (n_samples - 1) * steps_per_sample;

  // Delay offsets, in grid units, of the three RK4 evaluation times.
  const double lag = tau / h;
  DelayBuffer buffer(options.history, total_steps + 1);

  TimeSeries out;
  out.dt = options.sample_interval;
  out.meta = "mackey-glass tau=" + std::to_string(tau);
  out.values.reserve(n_samples);
  if (burn_steps == 0) out.values.push_back(buffer.last());

  for (std::size_t n = 0; n < total_steps; ++n) {
    const double sn = static_cast<double>(n);
    const double x = buffer.last();
    const double d0 = buffer.at(sn - lag);
    const double dh = buffer.at(sn + 0.5 - lag);
    const double d1 = buffer.at(sn + 1.0 - lag);
    const double k1 = mg_rate(x, d0);
    const double k2 = mg_rate(x + 0.5 * h * k1, dh);
    const double k3 = mg_rate(x + 0.5 * h * k2, dh);
    const double k4 = mg_rate(x + h * k3, d1);
    const double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) {
      throw Error(ErrorCode::integration_diverged,
                  "Mackey-Glass integration produced a non-finite state at step " + std::to_string(n + 1));
    }
    buffer.push(next);
    const std::size_t step = n + 1;
    if (step >= burn_steps && (step - burn_steps) % steps_per_sample == 0) out.values.push_back(next);
  }

  if (noise_std > 0.0) {
    Rng rng(seed);
    for (double& v : out.values) v += noise_std * rng.normal();
  }
  return out;
}

TimeSeries narma_response(std::size_t order, std::span<const double> inputs, bool saturate) {
  require(order >= 1, ErrorCode::invalid_argument, "NARMA order must be >= 1");
  require(!inputs.empty(), ErrorCode::invalid_argument, "NARMA needs at least one input");
  const std::size_t n = inputs.size();
  // y[j] holds y(j); y(0) = 0.
  std::vector<double> y(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double window = 0.0;
    for (std::size_t i = 0; i < order && i <= k; ++i) window += y[k - i];
    const double lagged = k + 1 >= order ? inputs[k + 1 - order] : 0.0;
    double next = 0.3 * y[k] + 0.05 * y[k] * window + 1.5 * lagged * inputs[k] + 0.1;
    if (saturate) next = std::tanh(next);
    if (!std::isfinite(next) || std::abs(next) > 1e6) {
      throw Error(ErrorCode::diverged_realization,
                  "NARMA-" + std::to_string(order) + " realization diverged at k=" + std::to_string(k + 1));
    }
    y[k + 1] = next;
  }
  TimeSeries out;
  out.values.assign(y.begin() + 1, y.end());
  out.meta = "narma-" + std::to_string(order) + " target";
  return out;
}

NarmaSeries gen_narma(std::size_t order, std::size_t n_samples, std::uint64_t seed, bool saturate) {
  require(n_samples >= 1, ErrorCode::invalid_argument, "n_samples must be >= 1");
  Rng rng(seed);
  TimeSeries inputs;
  inputs.values.resize(n_samples);
  for (double& s : inputs.values) s = rng.uniform_open(0.0, 0.5);
  inputs.meta = "narma-" + std::to_string(order) + " input";
  auto targets = narma_response(order, inputs.values, saturate);
  return {std::move(inputs), std::move(targets)};
}

}  // namespace scrbo::seriesgen
