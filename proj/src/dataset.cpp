#include "eegssl/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "eegssl/binary_io.hpp"

namespace eegssl {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) fail(ErrorCode::IoError, "cannot write '" + tmp + "'");
    file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!file) fail(ErrorCode::IoError, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

void write_file_atomic(const std::string& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> encode_dataset(const EpochDataset& dataset) {
  ByteWriter out;
  out.put_bytes(kDatasetMagic);
  out.put(static_cast<std::uint64_t>(dataset.size()));
  for (const auto& e : dataset.epochs()) {
    out.put_array(std::span<const float>(e.samples));
    out.put(static_cast<std::int8_t>(e.label ? stage_index(*e.label) : -1));
    out.put_string(e.source_id);
  }
  return out.take();
}

EpochDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const auto magic = in.get_bytes(kDatasetMagic.size());
  if (magic != kDatasetMagic) {
    fail(ErrorCode::VersionMismatch, "expected magic " + std::string(kDatasetMagic) + ", found '" + magic + "'");
  }
  const auto count = in.get<std::uint64_t>();
  const std::size_t min_record = kEpochLength * sizeof(float) + 1 + 4;
  if (count > in.remaining() / min_record) {
    fail(ErrorCode::TruncatedFile, "cache claims " + std::to_string(count) + " epochs but is too short");
  }
  std::vector<Epoch> epochs(count);
  for (auto& e : epochs) {
    e.samples.resize(kEpochLength);
    in.get_array(std::span<float>(e.samples));
    const auto label = in.get<std::int8_t>();
    if (label != -1) {
      e.label = stage_from_index(label);
      if (!e.label) fail(ErrorCode::MalformedHeader, "label " + std::to_string(label) + " out of range");
    }
    e.source_id = in.get_string();
  }
  if (!in.at_end()) fail(ErrorCode::MalformedHeader, "trailing bytes after last epoch");
  return EpochDataset(std::move(epochs));
}

void write_dataset_cache(const std::string& path, const EpochDataset& dataset) {
  write_file_atomic(path, encode_dataset(dataset));
}

EpochDataset read_dataset_cache(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    auto ds = decode_dataset(bytes);
    return EpochDataset(std::vector<Epoch>(ds.epochs()), {path});
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

}  // namespace eegssl
