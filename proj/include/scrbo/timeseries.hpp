#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scrbo {

/// Uniformly sampled scalar series.
struct TimeSeries {
  std::vector<double> values;
  double dt = 1.0;
  std::string meta;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }

  /// Throws ErrorCode::invalid_argument unless length >= 2 and all values
  /// are finite.
  void validate() const;
};

struct SplitSpec {
  std::size_t train_len = 0;
  std::size_t test_len = 0;
};

struct Standardized {
  TimeSeries series;
  double mean = 0.0;
  double std = 1.0;
};

/// Shifts and scales to zero mean, unit (population) standard deviation.
Standardized standardize(const TimeSeries& series);

/// First train_len points, then the next test_len points.
std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, const SplitSpec& spec);

}  // namespace scrbo
