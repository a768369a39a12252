#include "rankr/error.hpp"

namespace rankr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotOrthogonal: return "NotOrthogonal";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kIllConditionedCell: return "IllConditionedCell";
    case ErrorCode::kIllConditionedSpectrum: return "IllConditionedSpectrum";
    case ErrorCode::kNotTransverse: return "NotTransverse";
    case ErrorCode::kNotInterior: return "NotInterior";
    case ErrorCode::kIdentityInput: return "IdentityInput";
    case ErrorCode::kNotTranslating: return "NotTranslating";
    case ErrorCode::kNotRegularAxial: return "NotRegularAxial";
    case ErrorCode::kNotParabolic: return "NotParabolic";
    case ErrorCode::kNotFixed: return "NotFixed";
    case ErrorCode::kPowerExhausted: return "PowerExhausted";
    case ErrorCode::kInsufficientGenerators: return "InsufficientGenerators";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kMalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rankr
