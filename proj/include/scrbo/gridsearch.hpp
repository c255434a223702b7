#pragma once

#include <functional>
#include <vector>

#include "scrbo/scr.hpp"

namespace scrbo::grid {

/// n points from a to b inclusive.
std::vector<double> linspace(double a, double b, std::size_t n);
/// n points from 10^a to 10^b, equally spaced in the exponent.
std::vector<double> logspace(double a, double b, std::size_t n);

struct GridSpec {
  std::vector<std::size_t> n_nodes;
  std::vector<double> w_in;
  std::vector<double> w;
  std::vector<double> lambda;

  /// 3 x 10 x 10 x 5 = 1500 cells.
  static GridSpec standard();

  std::size_t size() const { return n_nodes.size() * w_in.size() * w.size() * lambda.size(); }
  /// Cell i in N-major, then w_in, w, lambda order.
  SCRParams at(std::size_t i) const;
};

struct GridEntry {
  SCRParams params;
  double value;
};

struct GridResult {
  SCRParams best;
  double best_value;
  std::vector<GridEntry> table;
};

/// Evaluates every cell once. Failing cells score +inf; ties keep the
/// earliest cell.
GridResult grid_search(const std::function<double(const SCRParams&)>& objective, const GridSpec& grid);

}  // namespace scrbo::grid
