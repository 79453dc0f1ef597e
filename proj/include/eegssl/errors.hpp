#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegssl {

enum class ErrorCode {
  // signal_io
  TruncatedFile,
  MalformedHeader,
  DegenerateCalibration,
  UnparsableAnnotation,
  OverlappingEntries,
  LengthTooShort,
  ChannelNotFound,
  EmptyDataset,
  // transforms
  InputTooShort,
  InvalidSpec,
  // nn_core / contrastive
  ShapeMismatch,
  ZeroNormVector,
  IndexOutOfRange,
  GraphCycle,
  NonFinite,
  // training_eval
  CheckpointShapeMismatch,
  InsufficientClassSamples,
  LengthMismatch,
  EmptyInput,
  // files and config
  IoError,
  VersionMismatch,
  ConfigError,
};

/// Coarse grouping used by the command line front end to pick an exit code.
enum class ErrorCategory { Config, Data, Numeric };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace eegssl
