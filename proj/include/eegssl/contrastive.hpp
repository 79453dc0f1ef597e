#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace eegssl {

/// `paper` averages l(i, i+N) over the first view only; `symmetric` also
/// includes l(i+N, i).
enum class LossMode { Paper, Symmetric };

std::string_view to_string(LossMode mode);
LossMode loss_mode_from_string(std::string_view name);

inline constexpr double kDefaultTemperature = 0.5;

/// 2N row vectors; rows i and i+N are the two views of original i.
struct EmbeddingBatch {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major count x dim

  EmbeddingBatch() = default;
  EmbeddingBatch(std::size_t count, std::size_t dim, std::vector<double> values);

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::size_t originals() const noexcept { return count / 2; }
};

struct SimilarityMatrix {
  std::size_t size = 0;
  std::vector<double> values;  // row-major size x size
  double temperature = kDefaultTemperature;

  double operator()(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

/// u.v / (|u| |v|); throws ZeroNormVector.
double cosine_sim(std::span<const double> u, std::span<const double> v);

/// Pairwise cosine similarities; throws ZeroNormVector naming the row.
SimilarityMatrix sim_matrix(const EmbeddingBatch& batch, double temperature = kDefaultTemperature);

/// -log softmax_{k != i}(M[i, k] / tau) evaluated at j, with 0-based indices.
double pair_loss(std::size_t i, std::size_t j, const SimilarityMatrix& m);

struct BatchLoss {
  double loss = 0.0;
  std::vector<double> pair_losses;  // N entries (paper) or 2N (symmetric)
};

BatchLoss batch_loss(const EmbeddingBatch& batch, double temperature = kDefaultTemperature,
                     LossMode mode = LossMode::Paper);

struct BatchLossGradient {
  BatchLoss value;
  std::vector<double> grad;  // d loss / d embeddings, same layout as values
};

BatchLossGradient batch_loss_with_grad(const EmbeddingBatch& batch, double temperature = kDefaultTemperature,
                                       LossMode mode = LossMode::Paper);

}  // namespace eegssl
