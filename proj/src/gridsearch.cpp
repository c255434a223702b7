#include "scrbo/gridsearch.hpp"

#include <cmath>
#include <limits>

#include "scrbo/error.hpp"

namespace scrbo::grid {

std::vector<double> linspace(double a, double b, std::size_t n) {
  require(n >= 1, ErrorCode::invalid_argument, "linspace: n must be >= 1");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  auto v = linspace(a, b, n);
  for (double& x : v) x = std::pow(10.0, x);
  return v;
}

GridSpec GridSpec::standard() {
  return GridSpec{{50, 100, 200}, linspace(0.01, 0.95, 10), linspace(0.01, 0.95, 10), logspace(-12.0, -2.0, 5)};
}

SCRParams GridSpec::at(std::size_t i) const {
  require(i < size(), ErrorCode::bounds, "grid index out of range");
  const std::size_t il = i % lambda.size();
  i /= lambda.size();
  const std::size_t iw = i % w.size();
  i /= w.size();
  const std::size_t iin = i % w_in.size();
  i /= w_in.size();
  return SCRParams{n_nodes[i], w_in[iin], w[iw], lambda[il]};
}

GridResult grid_search(const std::function<double(const SCRParams&)>& objective, const GridSpec& grid) {
  require(grid.size() > 0, ErrorCode::configuration, "grid is empty");
  GridResult r{grid.at(0), std::numeric_limits<double>::infinity(), {}};
  r.table.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SCRParams p = grid.at(i);
    double v;
    try {
      v = objective(p);
    } catch (const Error&) {
      v = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    if (v < r.best_value) {
      r.best_value = v;
      r.best = p;
    }
    r.table.push_back({p, v});
  }
  return r;
}

}  // namespace scrbo::grid
