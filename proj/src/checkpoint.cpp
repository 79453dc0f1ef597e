#include "eegssl/checkpoint.hpp"

#include "eegssl/binary_io.hpp"

namespace eegssl {

std::vector<std::uint8_t> encode_checkpoint(const ModelConfig& config, const Parameters<float>& params) {
  ByteWriter w;
  w.put_bytes(kCheckpointMagic);
  w.put(kCheckpointVersion);
  w.put_string(config.to_text());
  w.put(static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& [name, t] : params.tensors()) {
    w.put_string(name);
    w.put(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.put(static_cast<std::uint64_t>(d));
    w.put_array(std::span<const float>(t.data(), t.size()));
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.get_bytes(kCheckpointMagic.size());
  if (magic != kCheckpointMagic) {
    fail(ErrorCode::VersionMismatch,
         "expected magic " + std::string(kCheckpointMagic) + ", found '" + magic + "'");
  }
  const auto version = r.get<std::uint8_t>();
  if (version != kCheckpointVersion) {
    fail(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                         std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  ck.config = ModelConfig::from_text(r.get_string());
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.get_string();
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) fail(ErrorCode::MalformedHeader, "tensor '" + name + "' has implausible rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    const auto n = shape_size(shape);
    if (n > r.remaining() / sizeof(float)) fail(ErrorCode::TruncatedFile, "tensor '" + name + "' data truncated");
    std::vector<float> values(n);
    r.get_array(std::span<float>(values));
    if (ck.params.contains(name)) fail(ErrorCode::MalformedHeader, "duplicate tensor '" + name + "'");
    ck.params.set(name, Tensor<float>(std::move(shape), std::move(values)));
  }
  if (!r.at_end()) fail(ErrorCode::MalformedHeader, "trailing bytes after checkpoint tensors");
  auto layout = init_parameters<float>(ck.config, 0);
  load_into(layout, ck.params);
  return ck;
}

void write_checkpoint(const std::string& path, const ModelConfig& config, const Parameters<float>& params) {
  write_file_atomic(path, encode_checkpoint(config, params));
}

Checkpoint read_checkpoint(const std::string& path) {
  try {
    return decode_checkpoint(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

void load_into(Parameters<float>& target, const Parameters<float>& source) {
  if (source.tensors().size() != target.tensors().size()) {
    fail(ErrorCode::CheckpointShapeMismatch, "checkpoint has " + std::to_string(source.tensors().size()) +
                                                 " tensors, model expects " +
                                                 std::to_string(target.tensors().size()));
  }
  for (auto& [name, t] : target.tensors()) {
    if (!source.contains(name)) fail(ErrorCode::CheckpointShapeMismatch, "checkpoint lacks '" + name + "'");
    const auto& s = source.at(name);
    if (s.shape() != t.shape()) {
      fail(ErrorCode::CheckpointShapeMismatch,
           "'" + name + "' is " + shape_string(s.shape()) + ", model expects " + shape_string(t.shape()));
    }
    t = s;
  }
}

}  // namespace eegssl
