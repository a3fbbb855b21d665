#pragma once

#include <stdexcept>
#include <string>

namespace wmspde {

enum class ErrorCode {
  ok = 0,
  domain,
  capacity,
  factorization,
  numerical,
  insufficient_data,
  degenerate_reference,
  dimension_mismatch,
  io,
  config,
  statistical_alarm,
  check_failed,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace wmspde
