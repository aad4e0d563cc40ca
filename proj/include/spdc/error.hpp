#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdc {

enum class ErrorCode {
  kInvalidRegion,
  kInvalidArgument,
  kInvalidEpsilon,
  kNegativeDelta,
  kInsufficientTabulation,
  kInconsistentGeometry,
  kDivisionByZeroK,
  kNonpositiveCounts,
  kParseError,
  kMissingKey,
  kUnknownKey,
  kUnitRange,
  kIoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidRegion: return "INVALID_REGION";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kInvalidEpsilon: return "INVALID_EPSILON";
    case ErrorCode::kNegativeDelta: return "NEGATIVE_DELTA";
    case ErrorCode::kInsufficientTabulation: return "INSUFFICIENT_TABULATION";
    case ErrorCode::kInconsistentGeometry: return "INCONSISTENT_GEOMETRY";
    case ErrorCode::kDivisionByZeroK: return "DIVISION_BY_ZERO_K";
    case ErrorCode::kNonpositiveCounts: return "NONPOSITIVE_COUNTS";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kMissingKey: return "MISSING_KEY";
    case ErrorCode::kUnknownKey: return "UNKNOWN_KEY";
    case ErrorCode::kUnitRange: return "UNIT_RANGE";
    case ErrorCode::kIoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

// Every failure that aborts a computation is reported through this type.
// Soft failures (tolerance not met, optimizer stalled) are flags on results.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace spdc
