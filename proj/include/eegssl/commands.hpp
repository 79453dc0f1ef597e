#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eegssl {

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> settings;  // "key=value" overrides, applied after the config file

  // ingest
  std::vector<std::string> edf_paths;
  std::vector<std::string> hypnogram_paths;
  // limited
  std::optional<std::size_t> k_per_class;
  std::optional<int> repetitions;
  // synth
  std::optional<int> classes;
  std::optional<std::size_t> per_class;
  // ingest, synth (dataset) and export-embeddings (TSV)
  std::optional<std::string> output;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

std::vector<std::string> command_names();

/// Runs one subcommand and maps failures to exit codes (2 config, 3 data,
/// 4 numeric). Progress goes to `out`, errors to `err`.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace eegssl
