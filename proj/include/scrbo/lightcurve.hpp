#pragma once

#include <cstddef>
#include <vector>

#include "scrbo/timeseries.hpp"

namespace scrbo::lightcurve {

/// Irregularly sampled light curve (times in days, magnitudes).
struct IrregularSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return times.size(); }
  /// Equal lengths, at least 4 points, finite, strictly increasing times.
  void validate() const;
};

/// Samples mapped to phase in [0, period), sorted by phase; equal phases keep
/// their original time order.
struct FoldedSeries {
  std::vector<double> phases;
  std::vector<double> values;
  double period = 1.0;
};

FoldedSeries fold(const IrregularSeries& series, double period);

/// Averages the folded samples into n_bins / n_periods equal phase bins,
/// fills empty bins by a quadratic through the three nearest occupied bins
/// (wrapping around the period) and tiles the profile n_periods times.
TimeSeries bin_series(const FoldedSeries& folded, std::size_t n_bins, std::size_t n_periods);

/// Savitzky-Golay smoothing. Interior points use the centred window; the
/// first and last window/2 points are evaluated from the polynomial fitted
/// to the first (last) `window` samples.
TimeSeries savgol_filter(const TimeSeries& series, std::size_t window, std::size_t polyorder);

struct PrepOptions {
  double period = 0.0;
  std::size_t n_bins = 500;
  std::size_t n_periods = 10;
  std::size_t sg_window = 11;
  std::size_t sg_order = 3;
};

/// fold -> bin -> smooth.
TimeSeries preprocess(const IrregularSeries& series, const PrepOptions& options);

}  // namespace scrbo::lightcurve
