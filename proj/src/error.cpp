#include "sbmsir/error.hpp"

namespace sbmsir {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::AsymmetricW: return "AsymmetricW";
    case ErrorCode::NTooSmall: return "NTooSmall";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MaxAttemptsExceeded: return "MaxAttemptsExceeded";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InfeasibleInit: return "InfeasibleInit";
    case ErrorCode::IncompleteTrajectory: return "IncompleteTrajectory";
    case ErrorCode::EventCapExceeded: return "EventCapExceeded";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::SingularS: return "SingularS";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::QuadratureUnstable: return "QuadratureUnstable";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RunFailed: return "RunFailed";
  }
  return "Unknown";
}

}  // namespace sbmsir
