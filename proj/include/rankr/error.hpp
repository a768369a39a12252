#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankr {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kSingularMatrix,
  kNoConvergence,
  kNotSymmetric,
  kNotPositiveDefinite,
  kNotOrthogonal,
  kZeroVector,
  kIllConditionedCell,
  kIllConditionedSpectrum,
  kNotTransverse,
  kNotInterior,
  kIdentityInput,
  kNotTranslating,
  kNotRegularAxial,
  kNotParabolic,
  kNotFixed,
  kPowerExhausted,
  kInsufficientGenerators,
  kOverflow,
  kEmptySample,
  kMalformedInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace rankr
