#include <cmath>
#include <vector>

#include "doctest.h"
#include "scrbo/kernels.hpp"
#include "scrbo/rng.hpp"

using namespace scrbo;
using kernels::Isa;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match their definitions") {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6}, w{0.5, 2, 1};
  const auto& k = kernels::table(Isa::scalar);
  CHECK(k.dot(a.data(), b.data(), 3) == 12.0);
  CHECK(k.weighted_dot(a.data(), b.data(), w.data(), 3) == doctest::Approx(2.0 - 20.0 + 18.0));
  CHECK(k.sq_diff_sum(a.data(), b.data(), 3) == 9.0 + 49.0 + 9.0);
  std::vector<double> y{1, 1, 1};
  k.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  std::vector<double> out(3);
  k.cyclic_preactivation(a.data(), b.data(), 0.5, out.data(), 3);
  CHECK(out == std::vector<double>{1 + 0.5 * 6, 2 + 0.5 * 4, 3 - 0.5 * 5});
}

TEST_CASE("active table is one of the supported variants") {
  const auto& active = kernels::active();
  CHECK(kernels::supported(active.isa));
  MESSAGE("active kernels: " << kernels::to_string(active.isa));
}

TEST_CASE("vector variants agree with the scalar reference") {
  if (!kernels::supported(Isa::avx2)) {
    MESSAGE("AVX2 not available; skipping equivalence checks");
    return;
  }
  const auto& ref = kernels::table(Isa::scalar);
  const auto& vec = kernels::table(Isa::avx2);
  Rng rng(7);
  // Lengths cover empty, sub-vector, unrolled body and ragged tails.
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 31u, 64u, 181u, 999u}) {
    CAPTURE(n);
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    auto w = random_vector(rng, n);
    for (double& x : w) x = std::abs(x);

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]) * (1.0 + w[i]);
    const double tol = 1e-14 * (scale + 1.0);

    CHECK(std::abs(ref.dot(a.data(), b.data(), n) - vec.dot(a.data(), b.data(), n)) <= tol);
    CHECK(std::abs(ref.weighted_dot(a.data(), b.data(), w.data(), n) -
                   vec.weighted_dot(a.data(), b.data(), w.data(), n)) <= tol);
    double sq_scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) sq_scale += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(ref.sq_diff_sum(a.data(), b.data(), n) - vec.sq_diff_sum(a.data(), b.data(), n)) <=
          1e-14 * sq_scale);

    auto y_ref = b, y_vec = b;
    ref.axpy(-0.75, a.data(), y_ref.data(), n);
    vec.axpy(-0.75, a.data(), y_vec.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y_ref[i] - y_vec[i]) <= 1e-15 * (1.0 + std::abs(y_ref[i])));

    std::vector<double> p_ref(n), p_vec(n);
    ref.cyclic_preactivation(a.data(), b.data(), 0.37, p_ref.data(), n);
    vec.cyclic_preactivation(a.data(), b.data(), 0.37, p_vec.data(), n);
    CHECK(p_ref == p_vec);  // bitwise
  }
}
