#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegssl/edf.hpp"
#include "eegssl/hypnogram.hpp"

namespace eegssl {

inline constexpr std::size_t kEpochLength = 3072;
inline constexpr double kTargetVariance = 0.5;

/// One normalized fixed-length signal window.
struct Epoch {
  std::vector<float> samples;  // kEpochLength values
  std::optional<StageLabel> label;
  std::string source_id;  // file:channel:window

  bool operator==(const Epoch&) const = default;
};

/// Immutable after construction; the histogram counts labeled epochs only.
class EpochDataset {
 public:
  EpochDataset() = default;
  EpochDataset(std::vector<Epoch> epochs, std::vector<std::string> provenance = {});

  const std::vector<Epoch>& epochs() const noexcept { return epochs_; }
  const std::array<std::size_t, kNumStages>& class_histogram() const noexcept { return histogram_; }
  const std::vector<std::string>& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return epochs_.size(); }
  bool empty() const noexcept { return epochs_.empty(); }
  const Epoch& operator[](std::size_t i) const { return epochs_[i]; }

  /// Subset in the given index order.
  EpochDataset select(std::span<const std::size_t> indices) const;
  /// Concatenation, keeping both provenance lists.
  static EpochDataset merge(std::span<const EpochDataset> parts);

  bool operator==(const EpochDataset&) const = default;

 private:
  std::vector<Epoch> epochs_;
  std::array<std::size_t, kNumStages> histogram_{};
  std::vector<std::string> provenance_;
};

/// Linear interpolation onto `target_len` points with both endpoints kept.
std::vector<double> resample(std::span<const double> signal, std::size_t target_len);

/// Zero mean, variance 0.5 (population convention); constant input maps to zeros.
std::vector<double> normalize(std::span<const double> samples);

double mean_of(std::span<const double> x);
/// Population variance.
double variance_of(std::span<const double> x);

struct EpochingOptions {
  std::string channel_label = "EEG Fpz-Cz";
  double epoch_seconds = 30.0;
  std::string source_name = "record";
};

/// Slices every scored window of `channel_label`, resamples it to
/// kEpochLength and normalizes it. Unscored windows and windows running past
/// the end of the signal are dropped.
EpochDataset extract_epochs(const EdfRecord& record, std::span<const HypnogramEntry> hypnogram,
                            const EpochingOptions& options = {});

/// Builds an Epoch from a raw window of any length >= 2.
Epoch make_epoch(std::span<const double> window, std::optional<StageLabel> label, std::string source_id);

}  // namespace eegssl
