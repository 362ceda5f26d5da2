#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tangible {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EmptyHistogram,
  EmptyMask,
  TooSmall,
  SingularTransform,
  LowSaturation,
  EmptyPointSet,
  DegenerateMask,
  CornerShortfall,
  Degenerate,
  CentroidOutsideHull,
  DuplicateCorners,
  ResidualTooHigh,
  NoPointer,
  NoDepth,
  AllFiltered,
  InvalidHeight,
  SpecViolation,
  IoError,
  ParseError,
};

// Stable machine-readable name, used in CLI output and JSONL status fields.
std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace tangible
