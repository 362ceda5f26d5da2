#include "tangible/error.hpp"

namespace tangible {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::LowSaturation: return "LowSaturation";
    case ErrorCode::EmptyPointSet: return "EmptyPointSet";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::CornerShortfall: return "CornerShortfall";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::CentroidOutsideHull: return "CentroidOutsideHull";
    case ErrorCode::DuplicateCorners: return "DuplicateCorners";
    case ErrorCode::ResidualTooHigh: return "ResidualTooHigh";
    case ErrorCode::NoPointer: return "NoPointer";
    case ErrorCode::NoDepth: return "NoDepth";
    case ErrorCode::AllFiltered: return "AllFiltered";
    case ErrorCode::InvalidHeight: return "InvalidHeight";
    case ErrorCode::SpecViolation: return "SpecViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace tangible
