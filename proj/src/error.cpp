#include "scrbo/error.hpp"

namespace scrbo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::integration_diverged: return "integration_diverged";
    case ErrorCode::diverged_realization: return "diverged_realization";
    case ErrorCode::degenerate_series: return "degenerate_series";
    case ErrorCode::bounds: return "bounds";
    case ErrorCode::domain: return "domain";
    case ErrorCode::insufficient_coverage: return "insufficient_coverage";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::shape: return "shape";
    case ErrorCode::ill_conditioned: return "ill_conditioned";
    case ErrorCode::optimization_failed: return "optimization_failed";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

}  // namespace scrbo
