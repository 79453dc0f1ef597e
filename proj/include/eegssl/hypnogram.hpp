#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eegssl {

/// Five-class AASM sleep stage, encoded 0-4.
enum class StageLabel : std::int8_t { W = 0, N1 = 1, N2 = 2, N3 = 3, REM = 4 };

inline constexpr std::size_t kNumStages = 5;
inline constexpr std::array<StageLabel, kNumStages> kAllStages = {
    StageLabel::W, StageLabel::N1, StageLabel::N2, StageLabel::N3, StageLabel::REM};

std::string_view stage_name(StageLabel stage);
std::optional<StageLabel> stage_from_index(int index);
inline int stage_index(StageLabel s) { return static_cast<int>(s); }

/// Maps an annotation text to a stage; R&K stages 3 and 4 merge into N3.
/// Movement time, unknown stages and any other text are unscored (nullopt).
std::optional<StageLabel> map_stage(std::string_view stage_string);

struct HypnogramEntry {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::optional<StageLabel> stage;  // nullopt: unscored

  bool operator==(const HypnogramEntry&) const = default;
};

/// EDF+ time-stamped annotation lists (0x15 duration separator, 0x14 text
/// separator, 0x00 terminator). Time-keeping TALs without text are skipped.
std::vector<HypnogramEntry> parse_hypnogram_tal(std::string_view bytes);

/// Whitespace-separated `onset_s duration_s stage string...` lines.
/// Blank lines and lines starting with '#' are ignored.
std::vector<HypnogramEntry> parse_hypnogram_text(std::string_view text);

/// Reads a hypnogram file: EDF+ (annotation channels) if it starts with an
/// EDF header, the text table otherwise.
std::vector<HypnogramEntry> read_hypnogram_file(const std::string& path);

}  // namespace eegssl
