#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "eegssl/edf.hpp"

namespace fixtures {

inline eegssl::ChannelSpec eeg_channel(std::string label, int spr, double pmin = -250.0, double pmax = 250.0) {
  eegssl::ChannelSpec c;
  c.label = std::move(label);
  c.physical_dimension = "uV";
  c.physical_min = pmin;
  c.physical_max = pmax;
  c.samples_per_record = spr;
  return c;
}

inline eegssl::ChannelSpec annotation_channel(int spr) {
  eegssl::ChannelSpec c;
  c.label = "EDF Annotations";
  c.physical_min = -1;
  c.physical_max = 1;
  c.samples_per_record = spr;
  return c;
}

inline eegssl::EdfHeader header(std::vector<eegssl::ChannelSpec> channels, double record_s = 1.0) {
  eegssl::EdfHeader h;
  h.patient_info = "X X X X";
  h.recording_info = "Startdate X X X X";
  h.num_data_records = 0;  // filled from the sample counts
  h.record_duration_s = record_s;
  h.channels = std::move(channels);
  return h;
}

/// Two channels, three records of 100 samples: channel c, record r, index i
/// holds the digital value 1000 * c + 100 * r + i - 500.
inline std::vector<std::uint8_t> two_channel_fixture() {
  auto h = header({eeg_channel("EEG Fpz-Cz", 100), eeg_channel("EEG Pz-Oz", 100, -100.0, 100.0)});
  std::vector<std::vector<std::int16_t>> d(2);
  for (int c = 0; c < 2; ++c) {
    for (int r = 0; r < 3; ++r) {
      for (int i = 0; i < 100; ++i) d[c].push_back(static_cast<std::int16_t>(1000 * c + 100 * r + i - 500));
    }
  }
  return eegssl::serialize_edf(h, d);
}

/// Minimal byte-offset EDF reader used as an independent oracle: raw digital
/// samples per channel, straight from the documented layout.
inline std::vector<std::vector<int>> reference_digital(const std::vector<std::uint8_t>& bytes) {
  const auto field = [&](std::size_t off, std::size_t len) {
    return std::stoi(std::string(reinterpret_cast<const char*>(bytes.data()) + off, len));
  };
  const int records = field(236, 8);
  const int ns = field(252, 4);
  std::vector<int> spr(ns);
  const std::size_t spr_off = 256 + static_cast<std::size_t>(ns) * (16 + 80 + 8 + 8 + 8 + 8 + 8 + 80);
  for (int c = 0; c < ns; ++c) spr[c] = field(spr_off + 8 * c, 8);
  std::vector<std::vector<int>> out(ns);
  std::size_t pos = 256 + 256 * static_cast<std::size_t>(ns);
  for (int r = 0; r < records; ++r) {
    for (int c = 0; c < ns; ++c) {
      for (int i = 0; i < spr[c]; ++i) {
        std::int16_t v;
        std::memcpy(&v, bytes.data() + pos, 2);
        pos += 2;
        out[c].push_back(v);
      }
    }
  }
  return out;
}

/// Scalar resample oracle: linear interpolation with endpoints kept.
inline std::vector<double> lerp_resample(const std::vector<double>& x, std::size_t n) {
  std::vector<double> out(n);
  const double scale = static_cast<double>(x.size() - 1) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = i * scale;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= x.size()) {
      out[i] = x.back();
    } else {
      const double f = pos - lo;
      out[i] = x[lo] * (1 - f) + x[lo + 1] * f;
    }
  }
  return out;
}

}  // namespace fixtures
