#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rgerm {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kConstantTerm,
  kSingularLinearPart,
  kNonDiagonalLinearPart,
  kZeroMultiIndex,
  kDivisionByZero,
  kInexactValue,
  kNumericCertification,
  kNotOneResonant,
  kNoOneResonantScope,
  kSmallDivisor,
  kTruncationTooSmall,
  kDegenerate,
  kLinearizable,
  kSpectrumMismatch,
  kNotAFunctionOfU,
  kOrbitTooShort,
  kOutsidePetal,
  kBranchCut,
  kEmptySample,
  kGeometrySearchFailed,
  kVerificationFailed,
  kParse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kConstantTerm: return "CONSTANT_TERM";
    case ErrorCode::kSingularLinearPart: return "SINGULAR_LINEAR_PART";
    case ErrorCode::kNonDiagonalLinearPart: return "NON_DIAGONAL_LINEAR_PART";
    case ErrorCode::kZeroMultiIndex: return "ZERO_MULTI_INDEX";
    case ErrorCode::kDivisionByZero: return "DIVISION_BY_ZERO";
    case ErrorCode::kInexactValue: return "INEXACT_VALUE";
    case ErrorCode::kNumericCertification: return "NUMERIC_CERTIFICATION";
    case ErrorCode::kNotOneResonant: return "NOT_ONE_RESONANT";
    case ErrorCode::kNoOneResonantScope: return "NO_ONE_RESONANT_SCOPE";
    case ErrorCode::kSmallDivisor: return "SMALL_DIVISOR";
    case ErrorCode::kTruncationTooSmall: return "TRUNCATION_TOO_SMALL";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kLinearizable: return "LINEARIZABLE";
    case ErrorCode::kSpectrumMismatch: return "SPECTRUM_MISMATCH";
    case ErrorCode::kNotAFunctionOfU: return "NOT_A_FUNCTION_OF_U";
    case ErrorCode::kOrbitTooShort: return "ORBIT_TOO_SHORT";
    case ErrorCode::kOutsidePetal: return "OUTSIDE_PETAL";
    case ErrorCode::kBranchCut: return "BRANCH_CUT";
    case ErrorCode::kEmptySample: return "EMPTY_SAMPLE";
    case ErrorCode::kGeometrySearchFailed: return "GEOMETRY_SEARCH_FAILED";
    case ErrorCode::kVerificationFailed: return "VERIFICATION_FAILED";
    case ErrorCode::kParse: return "PARSE_ERROR";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace rgerm
