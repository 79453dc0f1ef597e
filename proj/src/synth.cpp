#include "eegssl/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "eegssl/errors.hpp"
#include "eegssl/rng.hpp"

namespace eegssl {
namespace {

constexpr double kSampleRate = static_cast<double>(kEpochLength) / 30.0;

double class_frequency(int c, int classes) {
  if (classes == 1) return 1.5;
  return 1.5 * std::pow(20.0, static_cast<double>(c) / static_cast<double>(classes - 1));
}

// One period-2pi waveform per class; the shapes differ in their amplitude
// distribution (symmetric, right- or left-skewed spikes, flat, two-level).
double waveform(int c, double phase) {
  switch (c % 5) {
    case 0: return std::sin(phase);
    case 1: return 2.5 * std::exp(4.0 * (std::cos(phase) - 1.0)) - 0.6;
    case 2: return 2.0 * (phase / (2.0 * std::numbers::pi) - std::floor(phase / (2.0 * std::numbers::pi))) - 1.0;
    case 3: return std::tanh(4.0 * std::sin(phase));
    default: return 0.6 - 2.5 * std::exp(4.0 * (std::cos(phase) - 1.0));
  }
}

std::vector<double> synth_signal(int c, const SynthOptions& o, RngStream rng) {
  std::vector<double> x(kEpochLength);
  const double f = class_frequency(c, o.classes) * std::exp(rng.uniform(-o.jitter, o.jitter));
  double phase = rng.uniform(-0.25, 0.25) * std::numbers::pi;
  const double amp = rng.uniform(0.7, 1.3);
  double ar = 0.0;
  for (std::size_t t = 0; t < kEpochLength; ++t) {
    ar = 0.95 * ar + rng.normal(0.0, 1.0);
    x[t] = amp * waveform(c, phase) + o.noise * (0.3 * ar + 0.5 * rng.normal(0.0, 1.0));
    phase += 2.0 * std::numbers::pi * f / kSampleRate;
  }
  return x;
}

}  // namespace

EpochDataset synthesize(const SynthOptions& options) {
  if (options.classes < 1 || options.classes > static_cast<int>(kNumStages)) {
    fail(ErrorCode::InvalidSpec, "synthetic classes must be in 1..5");
  }
  if (options.per_class == 0) fail(ErrorCode::InvalidSpec, "per_class must be >= 1");
  if (!(options.noise >= 0.0)) fail(ErrorCode::InvalidSpec, "noise must be >= 0");
  const auto classes = static_cast<std::size_t>(options.classes);
  const std::size_t total = classes * options.per_class;
  std::vector<Epoch> epochs(total);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < total; ++i) {
    const int c = static_cast<int>(i % classes);
    const auto raw = synth_signal(c, options, RngStream(options.seed, {i}));
    char id[96];
    std::snprintf(id, sizeof(id), "synth-s%llu-r%06zu:EEG:%d", static_cast<unsigned long long>(options.seed),
                  i / classes, c);
    epochs[i] = make_epoch(raw, stage_from_index(c), id);
  }
  char prov[96];
  std::snprintf(prov, sizeof(prov), "synth classes=%d per_class=%zu seed=%llu noise=%g", options.classes,
                options.per_class, static_cast<unsigned long long>(options.seed), options.noise);
  return EpochDataset(std::move(epochs), {prov});
}

}  // namespace eegssl
