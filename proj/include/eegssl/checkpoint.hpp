#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegssl/model.hpp"

namespace eegssl {

inline constexpr std::string_view kCheckpointMagic = "SSLCKPT1";
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  Parameters<float> params;
};

/// magic, version byte, u32-prefixed config text, u32 tensor count, then per
/// tensor: u32-prefixed name, u32 rank, u64 dims, f32 data.
std::vector<std::uint8_t> encode_checkpoint(const ModelConfig& config, const Parameters<float>& params);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::string& path, const ModelConfig& config, const Parameters<float>& params);
Checkpoint read_checkpoint(const std::string& path);

/// Copies every tensor of `source` into `target`; names and shapes must agree
/// with `target`'s layout (CheckpointShapeMismatch otherwise).
void load_into(Parameters<float>& target, const Parameters<float>& source);

}  // namespace eegssl
