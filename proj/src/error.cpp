#include "fpme/error.hpp"

namespace fpme {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::GridError: return "GridError";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::NotNonnegative: return "NotNonnegative";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::BoundaryContact: return "BoundaryContact";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::InvalidScale: return "InvalidScale";
    case ErrorCode::ExcessiveDrift: return "ExcessiveDrift";
    case ErrorCode::OscillationNotReduced: return "OscillationNotReduced";
    case ErrorCode::ResolutionExhausted: return "ResolutionExhausted";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace fpme
