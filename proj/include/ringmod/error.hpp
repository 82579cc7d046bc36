#pragma once

#include <stdexcept>
#include <string>

namespace ringmod {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode {
  Ok = 0,
  InvalidArgument,
  ParseError,
  TrajectoryLeftChart,
  StepFailure,
  RadiusTooLarge,
  OutsideNormalRange,
  DegenerateTangent,
  NonPositiveDefinite,
  EmptyShell,
  SolverNotConverged,
  NotNormalized,
  NotDifferentiable,
  ImageLeftChart,
  UnsupportedExponent,
  IoError,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) fail(code, message);
}

}  // namespace ringmod
