#pragma once

#include <cstddef>
#include <cstdint>

#include "eegssl/epochs.hpp"

namespace eegssl {

struct SynthOptions {
  int classes = 5;
  std::size_t per_class = 200;
  std::uint64_t seed = 0;
  /// Background noise amplitude relative to the class oscillation.
  double noise = 1.0;
  /// Per-epoch frequency factor is exp(U(-jitter, jitter)).
  double jitter = 0.1;
};

/// Labeled epochs from class-dependent oscillation families: class c is a
/// periodic waveform of its own shape at a log-spaced dominant frequency
/// between 1.5 and 30 Hz (30 s at kEpochLength samples), starting within
/// pi/4 of phase zero, over AR(1) plus white background noise. Epoch i
/// belongs to class i % classes and to record i / classes, so every record
/// holds one epoch of each class. Throws InvalidSpec.
EpochDataset synthesize(const SynthOptions& options);

}  // namespace eegssl
