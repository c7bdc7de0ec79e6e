#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qbmm {

enum class ErrorCode {
  ZeroDensity,
  NegativeInput,
  NotRealizable,
  ExcludedSet,
  RootFindFailure,
  InvalidA,
  NonpositiveTheta,
  CellAvgNotRealizable,
  RealizabilityLost,
  ZeroSpread,
  UnknownPreset,
  LengthMismatch,
  IndivisibleRatio,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code identifies the failure class
/// so callers (and tests) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qbmm
