#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "eegssl/hypnogram.hpp"

namespace eegssl {

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<double, kNumStages> per_class_f1{};
  std::array<std::array<std::size_t, kNumStages>, kNumStages> confusion{};  // [true][predicted]
  std::size_t n_test = 0;

  /// {"accuracy", "macro_f1", "per_class_f1": {W..REM}, "confusion": [25], "n_test"}
  std::string to_json() const;
};

/// Labels and predictions are class indices 0..4. Throws LengthMismatch,
/// EmptyInput, IndexOutOfRange.
MetricsReport compute_metrics(std::span<const int> predictions, std::span<const int> labels);

}  // namespace eegssl
