#include "core/error.hpp"

namespace wmspde {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::domain: return "domain";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::factorization: return "factorization";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::degenerate_reference: return "degenerate_reference";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::statistical_alarm: return "statistical_alarm";
    case ErrorCode::check_failed: return "check_failed";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace wmspde
