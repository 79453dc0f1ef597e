#include "eegssl/hypnogram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "eegssl/edf.hpp"
#include "eegssl/errors.hpp"

namespace eegssl {
namespace {

constexpr char kDurationSep = '\x15';
constexpr char kTextSep = '\x14';
constexpr char kTalEnd = '\x00';

double parse_seconds(std::string_view s, bool require_sign) {
  if (s.empty()) fail(ErrorCode::UnparsableAnnotation, "empty time field");
  if (require_sign && s.front() != '+' && s.front() != '-') {
    fail(ErrorCode::UnparsableAnnotation, "onset must start with a sign: '" + std::string(s) + "'");
  }
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    fail(ErrorCode::UnparsableAnnotation, "bad time value '" + std::string(s) + "'");
  }
  return value;
}

// Sorts by onset and rejects overlapping scored intervals.
std::vector<HypnogramEntry> finish(std::vector<HypnogramEntry> entries) {
  for (const auto& e : entries) {
    if (e.onset_s < 0.0 || e.duration_s < 0.0) {
      fail(ErrorCode::UnparsableAnnotation, "negative onset or duration");
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.onset_s < b.onset_s; });
  constexpr double kTolerance = 1e-6;
  double covered_until = -1.0;
  for (const auto& e : entries) {
    if (e.duration_s <= 0.0) continue;
    if (e.onset_s + kTolerance < covered_until) {
      std::ostringstream msg;
      msg << "entry at " << e.onset_s << " s overlaps the previous entry ending at " << covered_until << " s";
      fail(ErrorCode::OverlappingEntries, msg.str());
    }
    covered_until = e.onset_s + e.duration_s;
  }
  return entries;
}

}  // namespace

std::string_view stage_name(StageLabel stage) {
  switch (stage) {
    case StageLabel::W: return "W";
    case StageLabel::N1: return "N1";
    case StageLabel::N2: return "N2";
    case StageLabel::N3: return "N3";
    case StageLabel::REM: return "REM";
  }
  return "?";
}

std::optional<StageLabel> stage_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumStages)) return std::nullopt;
  return static_cast<StageLabel>(index);
}

std::optional<StageLabel> map_stage(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return std::nullopt;
  s = s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
  if (s == "Sleep stage W") return StageLabel::W;
  if (s == "Sleep stage 1") return StageLabel::N1;
  if (s == "Sleep stage 2") return StageLabel::N2;
  if (s == "Sleep stage 3" || s == "Sleep stage 4") return StageLabel::N3;
  if (s == "Sleep stage R") return StageLabel::REM;
  return std::nullopt;
}

std::vector<HypnogramEntry> parse_hypnogram_tal(std::string_view bytes) {
  std::vector<HypnogramEntry> entries;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes[pos] == kTalEnd) {  // record padding
      ++pos;
      continue;
    }
    const auto end = bytes.find(kTalEnd, pos);
    if (end == std::string_view::npos) {
      fail(ErrorCode::UnparsableAnnotation, "TAL at byte " + std::to_string(pos) + " is not terminated");
    }
    const std::string_view tal = bytes.substr(pos, end - pos);
    pos = end + 1;

    const auto text_start = tal.find(kTextSep);
    if (text_start == std::string_view::npos) {
      fail(ErrorCode::UnparsableAnnotation, "TAL lacks a 0x14 separator: '" + std::string(tal) + "'");
    }
    const std::string_view timing = tal.substr(0, text_start);
    const auto dur_sep = timing.find(kDurationSep);
    const double onset = parse_seconds(timing.substr(0, dur_sep), true);
    double duration = 0.0;
    if (dur_sep != std::string_view::npos) duration = parse_seconds(timing.substr(dur_sep + 1), false);

    std::string_view rest = tal.substr(text_start + 1);
    while (!rest.empty()) {
      const auto sep = rest.find(kTextSep);
      const std::string_view text = rest.substr(0, sep);
      if (!text.empty()) entries.push_back({onset, duration, map_stage(text)});
      if (sep == std::string_view::npos) break;
      rest = rest.substr(sep + 1);
    }
  }
  return finish(std::move(entries));
}

std::vector<HypnogramEntry> parse_hypnogram_text(std::string_view text) {
  std::vector<HypnogramEntry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string onset, duration;
    fields >> onset >> duration;
    std::string stage;
    std::getline(fields, stage);
    if (duration.empty() || stage.find_first_not_of(" \t\r") == std::string::npos) {
      fail(ErrorCode::UnparsableAnnotation, "line " + std::to_string(line_no) + ": expected onset duration stage");
    }
    try {
      entries.push_back({parse_seconds(onset, false), parse_seconds(duration, false), map_stage(stage)});
    } catch (const Error& e) {
      fail(ErrorCode::UnparsableAnnotation, "line " + std::to_string(line_no) + ": " + e.message());
    }
  }
  return finish(std::move(entries));
}

std::vector<HypnogramEntry> read_hypnogram_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  try {
    if (bytes.size() >= 256 && bytes.compare(0, 8, "0       ") == 0) {
      const auto record = parse_edf(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
      return parse_hypnogram_tal(record.annotations());
    }
    return parse_hypnogram_text(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

}  // namespace eegssl
