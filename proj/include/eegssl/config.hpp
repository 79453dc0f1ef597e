#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eegssl/model.hpp"
#include "eegssl/synth.hpp"
#include "eegssl/training.hpp"

namespace eegssl {

/// Everything a run needs. Config files are `key = value` lines with dotted
/// keys; `#` starts a comment and values may be double-quoted.
struct RunConfig {
  std::string data_cache;      // labeled dataset (also the ingest/synth output)
  std::string pretrain_cache;  // unlabeled dataset; defaults to data_cache
  std::vector<std::string> edf_paths;
  std::vector<std::string> hypnogram_paths;
  std::string channel = "EEG Fpz-Cz";
  std::string checkpoint;  // defaults to <out>/checkpoint.bin
  std::string out_dir = "run";
  ModelConfig model = ModelConfig::tiny();
  TrainConfig train;
  SplitSpec split;
  bool exclude_test_from_pretraining = true;
  SynthOptions synth;
};

/// Applies the settings in `text` on top of `base`. Unknown keys and bad
/// values are collected and reported together as one ConfigError.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig read_run_config(const std::string& path);

/// Sets one dotted key; throws ConfigError.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Every key with its current value, in a form parse_run_config accepts.
std::string resolved_config_text(const RunConfig& config);

std::vector<std::string> config_keys();

}  // namespace eegssl
