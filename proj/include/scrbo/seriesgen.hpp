#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "scrbo/timeseries.hpp"

namespace scrbo::seriesgen {

/// Integration settings for the Mackey-Glass delay differential equation
///   dx/dt = 0.2 x(t - tau) / (1 + x(t - tau)^10) - 0.1 x(t).
struct MackeyGlassOptions {
  double history = 0.5;          // constant x on [-tau, 0]
  double step = 0.1;             // RK4 step
  double burn_in = 1000.0;       // time discarded before the first sample
  double sample_interval = 1.0;  // must be a multiple of `step`
};

/// n_samples values at unit spacing after burn-in, plus N(0, noise_std^2)
/// noise drawn from `seed`. Throws ErrorCode::integration_diverged if the
/// state becomes non-finite.
TimeSeries gen_mackey_glass(double tau, std::size_t n_samples, double noise_std, std::uint64_t seed,
                            const MackeyGlassOptions& options = {});

struct NarmaSeries {
  TimeSeries inputs;   // s(k), k = 0..n-1
  TimeSeries targets;  // y(k+1), aligned with inputs
};

/// Order-m NARMA driven by s(k) ~ U(0, 0.5):
///   y(k+1) = 0.3 y(k) + 0.05 y(k) sum_{i<m} y(k-i) + 1.5 s(k-m+1) s(k) + 0.1
/// with y(k) = 0 for k <= 0 and s(k) = 0 for k < 0. With `saturate` the
/// right-hand side is wrapped in tanh; for m = 20 the plain recurrence has no
/// fixed point and always diverges.
NarmaSeries gen_narma(std::size_t order, std::size_t n_samples, std::uint64_t seed, bool saturate = false);

/// Response of the NARMA recurrence to a given input sequence; element k is
/// y(k+1). Throws ErrorCode::diverged_realization if |y| exceeds 1e6.
TimeSeries narma_response(std::size_t order, std::span<const double> inputs, bool saturate = false);

}  // namespace scrbo::seriesgen
