#pragma once

#include <cstddef>
#include <span>

#include "eegssl/contrastive.hpp"
#include "eegssl/graph.hpp"
#include "eegssl/rng.hpp"

namespace eegssl {

enum class Mode { Train, Eval };

/// Same-padded 1-D cross-correlation. x (B, Cin, L), w (Cout, Cin, K), b (Cout).
template <typename T>
NodeId conv1d(Graph<T>& g, NodeId x, NodeId w, NodeId b, std::size_t stride);

template <typename T>
NodeId relu(Graph<T>& g, NodeId x);

template <typename T>
NodeId add(Graph<T>& g, NodeId a, NodeId b);

/// x (B, in), w (out, in), b (out).
template <typename T>
NodeId dense(Graph<T>& g, NodeId x, NodeId w, NodeId b);

/// Running statistics live in the parameter store and are updated in
/// train mode (unbiased variance, exponential moving average).
template <typename T>
struct BatchNormState {
  Tensor<T>* running_mean = nullptr;
  Tensor<T>* running_var = nullptr;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Per-channel normalization of (B, C, L) or (B, C) input.
template <typename T>
NodeId batch_norm(Graph<T>& g, NodeId x, NodeId scale, NodeId shift, BatchNormState<T> state, Mode mode);

/// Inverted dropout; identity in eval mode or at rate 0.
template <typename T>
NodeId dropout(Graph<T>& g, NodeId x, double rate, RngStream* rng, Mode mode);

/// (B, C, L) -> (B, C).
template <typename T>
NodeId global_avg_pool(Graph<T>& g, NodeId x);

/// Parameter-free residual path: strided subsampling plus zero channel padding.
template <typename T>
NodeId shortcut(Graph<T>& g, NodeId x, std::size_t out_channels, std::size_t stride);

/// sum(x * weights); used to project tensors to scalars in gradient checks.
template <typename T>
NodeId weighted_sum(Graph<T>& g, NodeId x, const Tensor<T>& weights);

template <typename T>
struct CrossEntropy {
  double loss = 0.0;
  Tensor<T> probabilities;  // (B, classes)
};

/// Batch-mean softmax cross-entropy with log-sum-exp stabilization.
template <typename T>
CrossEntropy<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

template <typename T>
struct CrossEntropyNode {
  NodeId loss;
  Tensor<T> probabilities;
};

template <typename T>
CrossEntropyNode<T> softmax_cross_entropy(Graph<T>& g, NodeId logits, std::span<const int> labels);

/// Contrastive batch loss over a (2N, D) embedding node.
template <typename T>
NodeId contrastive_loss(Graph<T>& g, NodeId embeddings, double temperature, LossMode mode);

}  // namespace eegssl
