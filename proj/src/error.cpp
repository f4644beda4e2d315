#include "shapelift/error.hpp"

namespace shapelift {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::AntipodalPoint: return "antipodal-point";
    case ErrorCode::EmptySample: return "empty-sample";
    case ErrorCode::SingularCovariance: return "singular-covariance";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::UnreachableDistance: return "unreachable-distance";
    case ErrorCode::TooFewPoints: return "too-few-points";
    case ErrorCode::DegenerateChord: return "degenerate-chord";
    case ErrorCode::MalformedData: return "malformed-data";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace shapelift
