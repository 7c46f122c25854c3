#include "ftcp/errors.hpp"

namespace ftcp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::kOutOfDomain: return "OutOfDomain";
    case ErrorCode::kOrderTooHigh: return "OrderTooHigh";
    case ErrorCode::kUnderdeterminedFit: return "UnderdeterminedFit";
    case ErrorCode::kSingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::kVanishingTangent: return "VanishingTangent";
    case ErrorCode::kNormalParallelToTangent: return "NormalParallelToTangent";
    case ErrorCode::kGimbalLock: return "GimbalLock";
    case ErrorCode::kNonpositiveDisplacement: return "NonpositiveDisplacement";
    case ErrorCode::kOutOfTimeRange: return "OutOfTimeRange";
    case ErrorCode::kDomainMismatch: return "DomainMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ftcp
