#include "scrbo/lightcurve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scrbo/error.hpp"

namespace scrbo::lightcurve {

void IrregularSeries::validate() const {
  require(times.size() == values.size(), ErrorCode::shape, "times and values differ in length");
  require(times.size() >= 4, ErrorCode::invalid_argument, "light curve needs at least 4 samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(values[i]), ErrorCode::invalid_argument,
            "light curve contains a non-finite value");
    if (i > 0) {
      require(times[i] > times[i - 1], ErrorCode::invalid_argument, "light curve times must be strictly increasing");
    }
  }
}

FoldedSeries fold(const IrregularSeries& series, double period) {
  require(period > 0.0 && std::isfinite(period), ErrorCode::domain, "period must be positive");
  require(series.times.size() == series.values.size(), ErrorCode::shape, "times and values differ in length");

  const std::size_t n = series.size();
  std::vector<double> phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = std::fmod(series.times[i], period);
    if (p < 0.0) p += period;
    if (p >= period) p = 0.0;
    phase[i] = p;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (phase[a] != phase[b]) return phase[a] < phase[b];
    return series.times[a] < series.times[b];
  });

  FoldedSeries out;
  out.period = period;
  out.phases.reserve(n);
  out.values.reserve(n);
  for (std::size_t idx : order) {
    out.phases.push_back(phase[idx]);
    out.values.push_back(series.values[idx]);
  }
  return out;
}

TimeSeries bin_series(const FoldedSeries& folded, std::size_t n_bins, std::size_t n_periods) {
  require(n_bins >= 4, ErrorCode::parameter, "n_bins must be >= 4");
  require(n_periods >= 1, ErrorCode::parameter, "n_periods must be >= 1");
  require(n_bins % n_periods == 0, ErrorCode::parameter, "n_bins must be a multiple of n_periods");
  require(folded.period > 0.0, ErrorCode::domain, "period must be positive");

  const std::size_t per_period = n_bins / n_periods;
  std::vector<double> sum(per_period, 0.0);
  std::vector<std::size_t> count(per_period, 0);
  for (std::size_t i = 0; i < folded.phases.size(); ++i) {
    auto bin = static_cast<std::size_t>(std::floor(folded.phases[i] / folded.period * static_cast<double>(per_period)));
    bin = std::min(bin, per_period - 1);
    sum[bin] += folded.values[i];
    ++count[bin];
  }

  std::vector<std::size_t> occupied;
  for (std::size_t b = 0; b < per_period; ++b) {
    if (count[b] > 0) occupied.push_back(b);
  }
  require(occupied.size() >= 3, ErrorCode::insufficient_coverage,
          "need at least 3 occupied phase bins, found " + std::to_string(occupied.size()));

  std::vector<double> profile(per_period, 0.0);
  for (std::size_t b : occupied) profile[b] = sum[b] / static_cast<double>(count[b]);

  const auto span = static_cast<long long>(per_period);
  for (std::size_t b = 0; b < per_period; ++b) {
    if (count[b] > 0) continue;
    // Signed circular offsets of occupied bins, in (-span/2, span/2].
    std::vector<std::pair<long long, std::size_t>> near;
    near.reserve(occupied.size());
    for (std::size_t j : occupied) {
      long long d = (static_cast<long long>(j) - static_cast<long long>(b)) % span;
      if (d < 0) d += span;
      if (2 * d > span) d -= span;
      near.emplace_back(d, j);
    }
    std::partial_sort(near.begin(), near.begin() + 3, near.end(), [](const auto& a, const auto& c) {
      const auto da = std::llabs(a.first), dc = std::llabs(c.first);
      return da != dc ? da < dc : a.first < c.first;
    });
    double value = 0.0;
    for (int i = 0; i < 3; ++i) {
      double weight = 1.0;
      for (int j = 0; j < 3; ++j) {
        if (j != i) {
          weight *= (0.0 - static_cast<double>(near[j].first)) /
                    static_cast<double>(near[i].first - near[j].first);
        }
      }
      value += weight * profile[near[i].second];
    }
    profile[b] = value;
  }

  TimeSeries out;
  out.dt = folded.period / static_cast<double>(per_period);
  out.meta = "binned light curve";
  out.values.reserve(n_bins);
  for (std::size_t p = 0; p < n_periods; ++p) out.values.insert(out.values.end(), profile.begin(), profile.end());
  return out;
}

namespace {

/// Weights that evaluate, at window position `at`, the least-squares
/// polynomial of the given order fitted over a window of `window` samples.
Eigen::VectorXd savgol_weights(std::size_t window, std::size_t polyorder, std::size_t at) {
  Eigen::MatrixXd vander(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(polyorder + 1));
  for (std::size_t j = 0; j < window; ++j) {
    const double x = static_cast<double>(j) - static_cast<double>(at);
    double power = 1.0;
    for (std::size_t k = 0; k <= polyorder; ++k) {
      vander(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = power;
      power *= x;
    }
  }
  // Row 0 of the pseudo-inverse gives the constant coefficient, i.e. the fit at x = 0.
  const Eigen::MatrixXd pinv =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(vander.rows(), vander.rows()));
  return pinv.row(0).transpose();
}

}  // namespace

TimeSeries savgol_filter(const TimeSeries& series, std::size_t window, std::size_t polyorder) {
  require(window % 2 == 1, ErrorCode::parameter, "Savitzky-Golay window must be odd");
  require(window > polyorder, ErrorCode::parameter, "Savitzky-Golay window must exceed the polynomial order");
  require(window <= series.size(), ErrorCode::parameter, "Savitzky-Golay window longer than the series");

  const std::size_t n = series.size();
  const std::size_t half = window / 2;
  std::vector<Eigen::VectorXd> weights(window);
  for (std::size_t at = 0; at < window; ++at) weights[at] = savgol_weights(window, polyorder, at);

  TimeSeries out = series;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start = i >= half ? i - half : 0;
    start = std::min(start, n - window);
    const auto& w = weights[i - start];
    double acc = 0.0;
    for (std::size_t j = 0; j < window; ++j) acc += w[static_cast<Eigen::Index>(j)] * series.values[start + j];
    out.values[i] = acc;
  }
  return out;
}

TimeSeries preprocess(const IrregularSeries& series, const PrepOptions& options) {
  series.validate();
  auto binned = bin_series(fold(series, options.period), options.n_bins, options.n_periods);
  return savgol_filter(binned, options.sg_window, options.sg_order);
}

}  // namespace scrbo::lightcurve
