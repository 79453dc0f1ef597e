#include "eegssl/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "eegssl/errors.hpp"

namespace eegssl {
namespace {

constexpr std::string_view kAnnotationLabel = "EDF Annotations";
constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kChannelHeaderBytes = 256;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(' ');
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(' ');
  return s.substr(first, last - first + 1);
}

class FieldReader {
 public:
  explicit FieldReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t width) {
    if (pos_ + width > bytes_.size()) {
      fail(ErrorCode::TruncatedFile, "header ends at byte " + std::to_string(bytes_.size()));
    }
    std::string_view field(reinterpret_cast<const char*>(bytes_.data()) + pos_, width);
    pos_ += width;
    return field;
  }

  std::string text(std::size_t width) { return std::string(trim(take(width))); }

  long integer(std::size_t width, const char* name) {
    const auto field = trim(take(width));
    long value = 0;
    const auto* end = field.data() + field.size();
    const char* begin = field.data();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (field.empty() || ec != std::errc() || ptr != end) {
      fail(ErrorCode::MalformedHeader,
           std::string(name) + " is not an integer: '" + std::string(field) + "'");
    }
    return value;
  }

  double real(std::size_t width, const char* name) {
    const auto field = trim(take(width));
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const char* begin = field.data();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
      fail(ErrorCode::MalformedHeader,
           std::string(name) + " is not a number: '" + std::string(field) + "'");
    }
    return value;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_text(std::vector<std::uint8_t>& out, std::string_view text, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) {
    out.push_back(i < text.size() ? static_cast<std::uint8_t>(text[i]) : std::uint8_t{' '});
  }
}

std::string format_number(double value, std::size_t width) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, ptr);
  for (int precision = 12; s.size() > width && precision > 0; --precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    s = buf;
  }
  if (s.size() > width) fail(ErrorCode::MalformedHeader, "value does not fit header field: " + s);
  return s;
}

}  // namespace

bool ChannelSpec::is_annotation() const { return trim(label) == kAnnotationLabel; }

double ChannelSpec::to_physical(int digital) const {
  return physical_min + (static_cast<double>(digital) - digital_min) * (physical_max - physical_min) /
                            (static_cast<double>(digital_max) - digital_min);
}

double EdfHeader::sampling_rate(std::size_t channel) const {
  return static_cast<double>(channels.at(channel).samples_per_record) / record_duration_s;
}

std::ptrdiff_t EdfHeader::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].label == trim(label)) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

const ChannelSpec* EdfHeader::find(std::string_view label) const {
  const auto i = index_of(label);
  return i < 0 ? nullptr : &channels[static_cast<std::size_t>(i)];
}

const std::vector<double>& EdfRecord::signal(std::string_view label) const {
  const auto i = header.index_of(label);
  if (i < 0 || header.channels[static_cast<std::size_t>(i)].is_annotation()) {
    fail(ErrorCode::ChannelNotFound, "no signal channel labelled '" + std::string(label) + "'");
  }
  return signals[static_cast<std::size_t>(i)];
}

std::string EdfRecord::annotations() const {
  // Annotation channels are interleaved per data record; rebuild record order.
  std::string joined;
  std::vector<std::size_t> annotation_channels;
  for (std::size_t c = 0; c < header.channels.size(); ++c) {
    if (header.channels[c].is_annotation()) annotation_channels.push_back(c);
  }
  if (annotation_channels.empty()) return joined;
  for (long r = 0; r < header.num_data_records; ++r) {
    for (auto c : annotation_channels) {
      const auto width = static_cast<std::size_t>(header.channels[c].samples_per_record) * 2;
      joined.append(annotation_bytes[c], static_cast<std::size_t>(r) * width, width);
    }
  }
  return joined;
}

EdfRecord parse_edf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedHeaderBytes) {
    fail(ErrorCode::TruncatedFile, "file has " + std::to_string(bytes.size()) +
                                       " bytes, fewer than the 256-byte fixed header");
  }
  FieldReader in(bytes);
  EdfRecord record;
  EdfHeader& h = record.header;
  h.version = in.text(8);
  if (h.version != "0") fail(ErrorCode::MalformedHeader, "unsupported version '" + h.version + "'");
  h.patient_info = in.text(80);
  h.recording_info = in.text(80);
  h.start_date = in.text(8);
  h.start_time = in.text(8);
  h.header_bytes = static_cast<int>(in.integer(8, "header byte count"));
  h.reserved = in.text(44);
  h.num_data_records = in.integer(8, "number of data records");
  h.record_duration_s = in.real(8, "record duration");
  const long ns = in.integer(4, "signal count");
  if (ns < 1) fail(ErrorCode::MalformedHeader, "signal count must be positive");
  if (h.header_bytes != static_cast<long>(kFixedHeaderBytes + kChannelHeaderBytes * ns)) {
    fail(ErrorCode::MalformedHeader, "header byte count " + std::to_string(h.header_bytes) +
                                         " does not match " + std::to_string(ns) + " signals");
  }
  if (h.num_data_records < -1) fail(ErrorCode::MalformedHeader, "negative record count");
  if (bytes.size() < static_cast<std::size_t>(h.header_bytes)) {
    fail(ErrorCode::TruncatedFile, "header promises " + std::to_string(h.header_bytes) +
                                       " bytes, file has " + std::to_string(bytes.size()));
  }

  const auto n = static_cast<std::size_t>(ns);
  h.channels.resize(n);
  for (auto& c : h.channels) c.label = in.text(16);
  for (auto& c : h.channels) c.transducer = in.text(80);
  for (auto& c : h.channels) c.physical_dimension = in.text(8);
  for (auto& c : h.channels) c.physical_min = in.real(8, "physical minimum");
  for (auto& c : h.channels) c.physical_max = in.real(8, "physical maximum");
  for (auto& c : h.channels) c.digital_min = static_cast<int>(in.integer(8, "digital minimum"));
  for (auto& c : h.channels) c.digital_max = static_cast<int>(in.integer(8, "digital maximum"));
  for (auto& c : h.channels) c.prefiltering = in.text(80);
  for (auto& c : h.channels) c.samples_per_record = static_cast<int>(in.integer(8, "samples per record"));
  for (auto& c : h.channels) c.reserved = in.text(32);

  bool annotation_only = true;
  std::size_t record_words = 0;
  for (const auto& c : h.channels) {
    if (c.samples_per_record < 1) {
      fail(ErrorCode::MalformedHeader, "channel '" + c.label + "' has no samples per record");
    }
    record_words += static_cast<std::size_t>(c.samples_per_record);
    if (c.is_annotation()) continue;
    annotation_only = false;
    if (c.digital_min == c.digital_max) {
      fail(ErrorCode::DegenerateCalibration, "channel '" + c.label + "' has digital_min = digital_max");
    }
    if (c.physical_min == c.physical_max) {
      fail(ErrorCode::DegenerateCalibration, "channel '" + c.label + "' has physical_min = physical_max");
    }
    if (c.digital_min > c.digital_max) {
      fail(ErrorCode::MalformedHeader, "channel '" + c.label + "' has digital_min > digital_max");
    }
  }
  if (h.record_duration_s <= 0.0 && !annotation_only) {
    fail(ErrorCode::MalformedHeader, "record duration must be positive");
  }

  const std::size_t record_bytes = record_words * 2;
  const std::size_t payload = bytes.size() - static_cast<std::size_t>(h.header_bytes);
  if (h.num_data_records == -1) {
    h.num_data_records = static_cast<long>(payload / record_bytes);
  } else if (payload < record_bytes * static_cast<std::size_t>(h.num_data_records)) {
    fail(ErrorCode::TruncatedFile,
         "header promises " + std::to_string(h.num_data_records) + " records of " +
             std::to_string(record_bytes) + " bytes, payload has " + std::to_string(payload));
  }

  const auto records = static_cast<std::size_t>(h.num_data_records);
  record.signals.resize(n);
  record.annotation_bytes.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto count = records * static_cast<std::size_t>(h.channels[c].samples_per_record);
    if (h.channels[c].is_annotation()) {
      record.annotation_bytes[c].reserve(count * 2);
    } else {
      record.signals[c].reserve(count);
    }
  }

  const std::uint8_t* p = bytes.data() + h.header_bytes;
  for (std::size_t r = 0; r < records; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const auto& ch = h.channels[c];
      const auto spr = static_cast<std::size_t>(ch.samples_per_record);
      if (ch.is_annotation()) {
        record.annotation_bytes[c].append(reinterpret_cast<const char*>(p), spr * 2);
        p += spr * 2;
        continue;
      }
      auto& out = record.signals[c];
      for (std::size_t i = 0; i < spr; ++i, p += 2) {
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
        out.push_back(ch.to_physical(raw));
      }
    }
  }
  return record;
}

EdfRecord read_edf_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  try {
    return parse_edf(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

std::vector<std::uint8_t> serialize_edf(const EdfHeader& header,
                                        const std::vector<std::vector<std::int16_t>>& digital) {
  const auto n = header.channels.size();
  if (digital.size() != n) fail(ErrorCode::ShapeMismatch, "one sample vector per channel required");
  std::size_t records = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto spr = static_cast<std::size_t>(header.channels[c].samples_per_record);
    if (spr == 0 || digital[c].size() % spr != 0) {
      fail(ErrorCode::ShapeMismatch, "channel sample count is not a whole number of records");
    }
    const auto r = digital[c].size() / spr;
    if (c > 0 && r != records) fail(ErrorCode::ShapeMismatch, "channels disagree on record count");
    records = r;
  }

  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeaderBytes * (n + 1));
  put_text(out, header.version, 8);
  put_text(out, header.patient_info, 80);
  put_text(out, header.recording_info, 80);
  put_text(out, header.start_date, 8);
  put_text(out, header.start_time, 8);
  put_text(out, std::to_string(kFixedHeaderBytes + kChannelHeaderBytes * n), 8);
  put_text(out, header.reserved, 44);
  put_text(out, std::to_string(header.num_data_records < 0 ? -1L : static_cast<long>(records)), 8);
  put_text(out, format_number(header.record_duration_s, 8), 8);
  put_text(out, std::to_string(n), 4);
  for (const auto& c : header.channels) put_text(out, c.label, 16);
  for (const auto& c : header.channels) put_text(out, c.transducer, 80);
  for (const auto& c : header.channels) put_text(out, c.physical_dimension, 8);
  for (const auto& c : header.channels) put_text(out, format_number(c.physical_min, 8), 8);
  for (const auto& c : header.channels) put_text(out, format_number(c.physical_max, 8), 8);
  for (const auto& c : header.channels) put_text(out, std::to_string(c.digital_min), 8);
  for (const auto& c : header.channels) put_text(out, std::to_string(c.digital_max), 8);
  for (const auto& c : header.channels) put_text(out, c.prefiltering, 80);
  for (const auto& c : header.channels) put_text(out, std::to_string(c.samples_per_record), 8);
  for (const auto& c : header.channels) put_text(out, c.reserved, 32);

  for (std::size_t r = 0; r < records; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const auto spr = static_cast<std::size_t>(header.channels[c].samples_per_record);
      for (std::size_t i = 0; i < spr; ++i) {
        const auto v = static_cast<std::uint16_t>(digital[c][r * spr + i]);
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
      }
    }
  }
  return out;
}

std::vector<std::int16_t> to_digital(const ChannelSpec& channel, std::span<const double> physical) {
  std::vector<std::int16_t> out;
  out.reserve(physical.size());
  const double gain = (static_cast<double>(channel.digital_max) - channel.digital_min) /
                      (channel.physical_max - channel.physical_min);
  for (double p : physical) {
    double d = std::round(channel.digital_min + (p - channel.physical_min) * gain);
    d = std::clamp(d, static_cast<double>(channel.digital_min), static_cast<double>(channel.digital_max));
    out.push_back(static_cast<std::int16_t>(d));
  }
  return out;
}

std::vector<std::int16_t> pack_annotation_bytes(std::string_view bytes, std::size_t samples) {
  if (bytes.size() > samples * 2) fail(ErrorCode::ShapeMismatch, "annotation text exceeds record size");
  std::vector<std::int16_t> out(samples, 0);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto word = static_cast<std::uint16_t>(out[i / 2]);
    const auto b = static_cast<std::uint8_t>(bytes[i]);
    word = (i % 2 == 0) ? static_cast<std::uint16_t>((word & 0xff00) | b)
                        : static_cast<std::uint16_t>((word & 0x00ff) | (b << 8));
    out[i / 2] = static_cast<std::int16_t>(word);
  }
  return out;
}

}  // namespace eegssl
