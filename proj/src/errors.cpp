#include "eegssl/errors.hpp"

namespace eegssl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::UnparsableAnnotation: return "UnparsableAnnotation";
    case ErrorCode::OverlappingEntries: return "OverlappingEntries";
    case ErrorCode::LengthTooShort: return "LengthTooShort";
    case ErrorCode::ChannelNotFound: return "ChannelNotFound";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InputTooShort: return "InputTooShort";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::GraphCycle: return "GraphCycle";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::CheckpointShapeMismatch: return "CheckpointShapeMismatch";
    case ErrorCode::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
      return ErrorCategory::Config;
    case ErrorCode::ZeroNormVector:
    case ErrorCode::NonFinite:
    case ErrorCode::GraphCycle:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace eegssl
