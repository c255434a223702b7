#include <cstdlib>
#include <string>

#include "scrbo/error.hpp"
#include "scrbo/kernels.hpp"

namespace scrbo::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar,          scalar::dot, scalar::weighted_dot, scalar::axpy,
                              scalar::sq_diff_sum, scalar::cyclic_preactivation};

#if defined(SCRBO_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2,          avx2::dot, avx2::weighted_dot, avx2::axpy,
                            avx2::sq_diff_sum, avx2::cyclic_preactivation};
#endif

const KernelTable& select() {
  if (const char* forced = std::getenv("SCRBO_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return kScalar;
    if (name == "avx2") return table(Isa::avx2);
    throw Error(ErrorCode::configuration, "SCRBO_KERNELS must be 'scalar' or 'avx2', got '" + name + "'");
  }
  if (supported(Isa::avx2)) return table(Isa::avx2);
  return kScalar;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(SCRBO_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw Error(ErrorCode::invalid_argument, "kernel variant '" + std::string(to_string(isa)) +
                                                 "' is not supported on this CPU/build");
  }
#if defined(SCRBO_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace scrbo::kernels
