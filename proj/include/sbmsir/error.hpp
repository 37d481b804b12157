#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbmsir {

enum class ErrorCode {
  ZeroRow,
  AsymmetricW,
  NTooSmall,
  NonPositiveRate,
  InvalidArgument,
  MaxAttemptsExceeded,
  InvalidGraph,
  InfeasibleInit,
  IncompleteTrajectory,
  EventCapExceeded,
  OutOfDomain,
  StepSizeUnderflow,
  HorizonExceeded,
  SingularS,
  NoConvergence,
  QuadratureUnstable,
  GridMismatch,
  ParseError,
  RunFailed,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sbmsir
