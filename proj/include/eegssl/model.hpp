#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eegssl/graph.hpp"
#include "eegssl/ops.hpp"
#include "eegssl/rng.hpp"

namespace eegssl {

enum class Preset { Paper18, Tiny };

std::string_view to_string(Preset preset);
Preset preset_from_string(std::string_view name);

struct ResidualBlockSpec {
  int channels = 0;
  int stride = 1;
  bool operator==(const ResidualBlockSpec&) const = default;
};

/// Backbone: stem conv-BN-ReLU, residual blocks
/// (conv-BN-ReLU-dropout-conv-BN + shortcut, ReLU), a 1x1 projection conv to
/// embedding_dim, then global average pooling. Classifier: dense hidden
/// layers with ReLU, then num_classes logits.
struct ModelConfig {
  Preset preset = Preset::Tiny;
  int conv_kernel = 32;
  int stem_channels = 8;
  int stem_stride = 1;
  std::vector<ResidualBlockSpec> blocks;
  double dropout_rate = 0.2;
  std::vector<int> classifier_hidden{384, 192, 96};
  int num_classes = 5;
  int embedding_dim = 16;

  /// 1 stem + 8 blocks x 2 + 1 projection = 18 convolutions, kernel 32.
  static ModelConfig paper18();
  /// Desk-scale: stem + 2 blocks (8 and 16 channels).
  static ModelConfig tiny();
  static ModelConfig for_preset(Preset preset);

  int conv_layer_count() const { return 2 + 2 * static_cast<int>(blocks.size()); }
  /// Throws InvalidSpec.
  void validate() const;

  /// Canonical `key=value` lines; from_text(to_text()) round-trips.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

/// Named tensors: trainable weights plus batch-norm running statistics.
template <typename T>
class Parameters {
 public:
  std::map<std::string, Tensor<T>>& tensors() noexcept { return tensors_; }
  const std::map<std::string, Tensor<T>>& tensors() const noexcept { return tensors_; }

  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  void set(const std::string& name, Tensor<T> value) { tensors_[name] = std::move(value); }

  static bool is_trainable(std::string_view name);
  static bool is_backbone(std::string_view name);
  std::size_t trainable_count() const;

  template <typename U>
  Parameters<U> cast() const {
    Parameters<U> out;
    for (const auto& [name, t] : tensors_) out.set(name, t.template cast<U>());
    return out;
  }

  bool operator==(const Parameters&) const = default;

 private:
  std::map<std::string, Tensor<T>> tensors_;
};

/// Fan-in scaled centered-uniform weights, zero biases, unit BN scale.
template <typename T>
Parameters<T> init_parameters(const ModelConfig& config, std::uint64_t seed);

/// (B, 1, L) input -> (B, embedding_dim). Train mode updates BN running stats
/// in `params` and draws dropout masks from `rng`.
template <typename T>
NodeId forward_backbone(Graph<T>& g, Parameters<T>& params, const ModelConfig& config, NodeId input, Mode mode,
                        RngStream* rng);

/// (B, embedding_dim) -> (B, num_classes) logits.
template <typename T>
NodeId forward_classifier(Graph<T>& g, Parameters<T>& params, const ModelConfig& config, NodeId embeddings);

/// Packs epochs (or views) into a (B, 1, L) tensor.
template <typename T, typename Range>
Tensor<T> pack_batch(const Range& signals, std::size_t length) {
  Tensor<T> out({static_cast<std::size_t>(std::size(signals)), 1, length});
  std::size_t i = 0;
  for (const auto& s : signals) {
    if (std::size(s) != length) fail(ErrorCode::ShapeMismatch, "signal length differs from batch length");
    std::copy(std::begin(s), std::end(s), out.data() + i * length);
    ++i;
  }
  return out;
}

}  // namespace eegssl
