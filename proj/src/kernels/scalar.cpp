#include "scrbo/kernels.hpp"

namespace scrbo::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot(const double* a, const double* b, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void cyclic_preactivation(const double* drive, const double* prev, double w, double* out, std::size_t n) {
  if (n == 0) return;
  out[0] = drive[0] + w * prev[n - 1];
  for (std::size_t i = 1; i < n; ++i) out[i] = drive[i] + w * prev[i - 1];
}

}  // namespace scrbo::kernels::scalar
