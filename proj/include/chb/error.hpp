#pragma once

#include <stdexcept>
#include <string>

namespace chb {

enum class ErrorKind {
  invalid_argument,
  invalid_delta,
  invalid_p,
  mismatched_grids,
  bounds_violation,
  singular_system,
  solver_divergence,
  newton_divergence,
  line_search_failure,
  nonpositive_kappa,
  missing_constants,
  missing_artifacts,
  config_invalid,
  io_error,
  unsupported,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace chb
