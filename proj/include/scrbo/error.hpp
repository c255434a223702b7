#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scrbo {

enum class ErrorCode {
  invalid_argument,
  integration_diverged,
  diverged_realization,
  degenerate_series,
  bounds,
  domain,
  insufficient_coverage,
  parameter,
  singular_system,
  shape,
  ill_conditioned,
  optimization_failed,
  configuration,
  io,
  parse,
};

/// Stable identifier used in machine-readable CLI error lines.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace scrbo
