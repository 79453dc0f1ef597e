#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eegssl {

struct ChannelSpec {
  std::string label;               // e.g. "EEG Fpz-Cz"
  std::string transducer;
  std::string physical_dimension;  // e.g. "uV"
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = -32768;
  int digital_max = 32767;
  std::string prefiltering;
  int samples_per_record = 0;
  std::string reserved;

  bool is_annotation() const;
  /// Physical value for a raw 16-bit sample.
  double to_physical(int digital) const;
};

struct EdfHeader {
  std::string version = "0";
  std::string patient_info;
  std::string recording_info;
  std::string start_date = "01.01.00";  // dd.mm.yy
  std::string start_time = "00.00.00";  // hh.mm.ss
  int header_bytes = 256;
  std::string reserved;  // "EDF+C" / "EDF+D" for EDF+
  long num_data_records = -1;  // -1: unknown, resolved from file size
  double record_duration_s = 1.0;
  std::vector<ChannelSpec> channels;

  double sampling_rate(std::size_t channel) const;
  const ChannelSpec* find(std::string_view label) const;
  std::ptrdiff_t index_of(std::string_view label) const;
};

/// Decoded recording. Ordinary channels are in physical units; annotation
/// channels keep their raw record-concatenated bytes instead.
struct EdfRecord {
  EdfHeader header;
  std::vector<std::vector<double>> signals;       // one per channel, empty for annotation channels
  std::vector<std::string> annotation_bytes;      // one per channel, empty for ordinary channels

  const std::vector<double>& signal(std::string_view label) const;
  /// All annotation-channel bytes joined in record order.
  std::string annotations() const;
};

EdfRecord parse_edf(std::span<const std::uint8_t> bytes);
EdfRecord read_edf_file(const std::string& path);

/// Writes a conforming EDF file. Used to build fixtures; digital samples are
/// given per channel (annotation channels: raw bytes packed two per sample).
std::vector<std::uint8_t> serialize_edf(const EdfHeader& header,
                                        const std::vector<std::vector<std::int16_t>>& digital);

/// Digital representation of a physical signal under a channel's calibration
/// (rounded and clamped). Inverse of ChannelSpec::to_physical up to quantization.
std::vector<std::int16_t> to_digital(const ChannelSpec& channel, std::span<const double> physical);

/// Packs annotation text into 16-bit samples, zero padded to `samples` words.
std::vector<std::int16_t> pack_annotation_bytes(std::string_view bytes, std::size_t samples);

}  // namespace eegssl
