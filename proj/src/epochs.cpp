#include "eegssl/epochs.hpp"

#include <cmath>
#include <numeric>

#include "eegssl/errors.hpp"

namespace eegssl {

EpochDataset::EpochDataset(std::vector<Epoch> epochs, std::vector<std::string> provenance)
    : epochs_(std::move(epochs)), provenance_(std::move(provenance)) {
  for (const auto& e : epochs_) {
    if (e.samples.size() != kEpochLength) {
      fail(ErrorCode::ShapeMismatch, "epoch '" + e.source_id + "' has " + std::to_string(e.samples.size()) +
                                         " samples, expected " + std::to_string(kEpochLength));
    }
    if (e.label) ++histogram_[static_cast<std::size_t>(stage_index(*e.label))];
  }
}

EpochDataset EpochDataset::select(std::span<const std::size_t> indices) const {
  std::vector<Epoch> subset;
  subset.reserve(indices.size());
  for (auto i : indices) subset.push_back(epochs_.at(i));
  return EpochDataset(std::move(subset), provenance_);
}

EpochDataset EpochDataset::merge(std::span<const EpochDataset> parts) {
  std::vector<Epoch> all;
  std::vector<std::string> provenance;
  for (const auto& part : parts) {
    all.insert(all.end(), part.epochs_.begin(), part.epochs_.end());
    provenance.insert(provenance.end(), part.provenance_.begin(), part.provenance_.end());
  }
  return EpochDataset(std::move(all), std::move(provenance));
}

std::vector<double> resample(std::span<const double> signal, std::size_t target_len) {
  const std::size_t n = signal.size();
  if (n < 2 || target_len < 2) {
    fail(ErrorCode::LengthTooShort, "resample needs at least 2 input and output samples (got " +
                                        std::to_string(n) + " -> " + std::to_string(target_len) + ")");
  }
  if (n == target_len) return {signal.begin(), signal.end()};
  std::vector<double> out(target_len);
  const double denom = static_cast<double>(target_len - 1);
  for (std::size_t j = 0; j < target_len; ++j) {
    const double pos = static_cast<double>(j * (n - 1)) / denom;
    auto i = static_cast<std::size_t>(pos);
    if (i >= n - 1) {
      out[j] = signal[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out[j] = signal[i] + frac * (signal[i + 1] - signal[i]);
  }
  return out;
}

double mean_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size());
}

std::vector<double> normalize(std::span<const double> samples) {
  std::vector<double> out(samples.size(), 0.0);
  const double sd = std::sqrt(variance_of(samples));
  if (!(sd >= 1e-12)) return out;
  const double m = mean_of(samples);
  const double gain = std::sqrt(kTargetVariance) / sd;
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] - m) * gain;
  return out;
}

Epoch make_epoch(std::span<const double> window, std::optional<StageLabel> label, std::string source_id) {
  const auto normalized = normalize(resample(window, kEpochLength));
  Epoch epoch;
  epoch.samples.assign(normalized.begin(), normalized.end());
  epoch.label = label;
  epoch.source_id = std::move(source_id);
  return epoch;
}

EpochDataset extract_epochs(const EdfRecord& record, std::span<const HypnogramEntry> hypnogram,
                            const EpochingOptions& options) {
  const auto channel = record.header.index_of(options.channel_label);
  if (channel < 0 || record.header.channels[static_cast<std::size_t>(channel)].is_annotation()) {
    fail(ErrorCode::ChannelNotFound, "channel '" + options.channel_label + "' not in " + options.source_name);
  }
  if (!(options.epoch_seconds > 0.0)) fail(ErrorCode::InvalidSpec, "epoch length must be positive");
  const auto& signal = record.signals[static_cast<std::size_t>(channel)];
  const double fs = record.header.sampling_rate(static_cast<std::size_t>(channel));
  const auto window = static_cast<std::size_t>(std::llround(options.epoch_seconds * fs));

  std::vector<Epoch> epochs;
  for (const auto& entry : hypnogram) {
    if (!entry.stage) continue;
    const auto windows = static_cast<std::size_t>(std::floor(entry.duration_s / options.epoch_seconds + 1e-9));
    for (std::size_t w = 0; w < windows; ++w) {
      const double start_s = entry.onset_s + static_cast<double>(w) * options.epoch_seconds;
      const auto start = static_cast<std::size_t>(std::llround(start_s * fs));
      if (start + window > signal.size()) break;
      const auto index = static_cast<long long>(std::llround(start_s / options.epoch_seconds));
      epochs.push_back(make_epoch(std::span(signal).subspan(start, window), entry.stage,
                                  options.source_name + ":" + options.channel_label + ":" + std::to_string(index)));
    }
  }
  if (epochs.empty()) fail(ErrorCode::EmptyDataset, "no scored epochs in " + options.source_name);
  return EpochDataset(std::move(epochs), {options.source_name});
}

}  // namespace eegssl
