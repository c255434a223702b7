#include "scrbo/timeseries.hpp"

#include <cmath>
#include <numeric>

#include "scrbo/error.hpp"

namespace scrbo {

void TimeSeries::validate() const {
  require(values.size() >= 2, ErrorCode::invalid_argument,
          "time series needs at least 2 points");
  for (double v : values) {
    require(std::isfinite(v), ErrorCode::invalid_argument, "time series contains a non-finite value");
  }
}

Standardized standardize(const TimeSeries& series) {
  series.validate();
  const auto n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : series.values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  require(sd > 0.0 && std::isfinite(sd), ErrorCode::degenerate_series,
          "cannot standardize a series with zero variance");

  Standardized out{series, mean, sd};
  for (double& v : out.series.values) v = (v - mean) / sd;
  return out;
}

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, const SplitSpec& spec) {
  require(spec.train_len > 0 && spec.test_len > 0, ErrorCode::bounds,
          "split lengths must be positive");
  require(spec.train_len + spec.test_len <= series.size(), ErrorCode::bounds,
          "split lengths exceed series length");
  const auto first = series.values.begin();
  const auto mid = first + static_cast<std::ptrdiff_t>(spec.train_len);
  const auto last = mid + static_cast<std::ptrdiff_t>(spec.test_len);
  TimeSeries train{{first, mid}, series.dt, series.meta};
  TimeSeries test{{mid, last}, series.dt, series.meta};
  return {std::move(train), std::move(test)};
}

}  // namespace scrbo
