#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegssl/epochs.hpp"

namespace eegssl {

inline constexpr std::string_view kDatasetMagic = "SSLDSET1";

/// Cache layout: magic, u64 epoch count, then per epoch kEpochLength f32
/// samples, i8 label (-1 unlabeled), u32-length-prefixed source id.
std::vector<std::uint8_t> encode_dataset(const EpochDataset& dataset);
EpochDataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset_cache(const std::string& path, const EpochDataset& dataset);
EpochDataset read_dataset_cache(const std::string& path);

}  // namespace eegssl
