#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace scrbo::kernels {

/// Instruction-set variants of the arithmetic inner loops. `scalar` is the
/// reference; every other variant is equivalence-tested against it.
enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i w[i] * a[i] * b[i]
  double (*weighted_dot)(const double* a, const double* b, const double* w, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*sq_diff_sum)(const double* a, const double* b, std::size_t n);
  // out[i] = drive[i] + w * prev[(i + n - 1) % n]; bitwise identical across variants
  void (*cyclic_preactivation)(const double* drive, const double* prev, double w, double* out,
                               std::size_t n);
};

bool supported(Isa isa) noexcept;

/// Kernel table for a specific variant. Throws ErrorCode::invalid_argument if
/// the running CPU does not support it.
const KernelTable& table(Isa isa);

/// Variant chosen at first use: the widest supported one, unless the
/// SCRBO_KERNELS environment variable names another ("scalar", "avx2").
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double weighted_dot(std::span<const double> a, std::span<const double> b,
                           std::span<const double> w) {
  return active().weighted_dot(a.data(), b.data(), w.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sq_diff_sum(std::span<const double> a, std::span<const double> b) {
  return active().sq_diff_sum(a.data(), b.data(), a.size());
}

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double weighted_dot(const double* a, const double* b, const double* w, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
void cyclic_preactivation(const double* drive, const double* prev, double w, double* out, std::size_t n);
}  // namespace scalar

#if defined(SCRBO_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double weighted_dot(const double* a, const double* b, const double* w, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
void cyclic_preactivation(const double* drive, const double* prev, double w, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace scrbo::kernels
