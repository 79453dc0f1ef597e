#include "eegssl/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "eegssl/errors.hpp"

namespace eegssl {
namespace {

double norm(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss);
}

std::vector<double> unit_rows(const EmbeddingBatch& batch, std::vector<double>& norms) {
  std::vector<double> unit(batch.values.size());
  norms.resize(batch.count);
  for (std::size_t i = 0; i < batch.count; ++i) {
    const auto r = batch.row(i);
    const double n = norm(r);
    if (!(n > 0.0) || !std::isfinite(n)) {
      fail(ErrorCode::ZeroNormVector, "embedding " + std::to_string(i) + " has norm " + std::to_string(n));
    }
    norms[i] = n;
    for (std::size_t d = 0; d < batch.dim; ++d) unit[i * batch.dim + d] = r[d] / n;
  }
  return unit;
}

SimilarityMatrix gram(const std::vector<double>& unit, std::size_t count, std::size_t dim, double temperature) {
  SimilarityMatrix m;
  m.size = count;
  m.temperature = temperature;
  m.values.assign(count * count, 0.0);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < count; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += unit[i * dim + d] * unit[j * dim + d];
      m.values[i * count + j] = (i == j) ? 1.0 : std::clamp(dot, -1.0, 1.0);
    }
  }
  // Exact symmetry regardless of rounding in the two dot products.
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) m.values[j * count + i] = m.values[i * count + j];
  }
  return m;
}

void check_batch(const EmbeddingBatch& batch, double temperature) {
  if (batch.count < 2 || batch.count % 2 != 0) {
    fail(ErrorCode::ShapeMismatch, "embedding batch needs an even count >= 2, got " + std::to_string(batch.count));
  }
  if (!(temperature > 0.0)) fail(ErrorCode::InvalidSpec, "temperature must be positive");
}

// Row softmax over k != i of M[i, k] / tau; returns log of the normalizer
// relative to the row max, and fills probabilities.
double row_softmax(const SimilarityMatrix& m, std::size_t i, std::vector<double>* probs) {
  const double tau = m.temperature;
  double row_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.size; ++k) {
    if (k != i) row_max = std::max(row_max, m(i, k) / tau);
  }
  double z = 0.0;
  for (std::size_t k = 0; k < m.size; ++k) {
    if (k != i) z += std::exp(m(i, k) / tau - row_max);
  }
  if (probs) {
    probs->assign(m.size, 0.0);
    for (std::size_t k = 0; k < m.size; ++k) {
      if (k != i) (*probs)[k] = std::exp(m(i, k) / tau - row_max) / z;
    }
  }
  return row_max + std::log(z);
}

}  // namespace

std::string_view to_string(LossMode mode) { return mode == LossMode::Paper ? "paper" : "symmetric"; }

LossMode loss_mode_from_string(std::string_view name) {
  if (name == "paper") return LossMode::Paper;
  if (name == "symmetric") return LossMode::Symmetric;
  fail(ErrorCode::InvalidSpec, "unknown loss mode '" + std::string(name) + "'");
}

EmbeddingBatch::EmbeddingBatch(std::size_t count_, std::size_t dim_, std::vector<double> values_)
    : count(count_), dim(dim_), values(std::move(values_)) {
  if (values.size() != count * dim) fail(ErrorCode::ShapeMismatch, "embedding values do not match count x dim");
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) fail(ErrorCode::ShapeMismatch, "cosine_sim needs equal lengths");
  const double nu = norm(u);
  const double nv = norm(v);
  if (!(nu > 0.0) || !(nv > 0.0)) fail(ErrorCode::ZeroNormVector, "cosine_sim of a zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += (u[i] / nu) * (v[i] / nv);
  return std::clamp(dot, -1.0, 1.0);
}

SimilarityMatrix sim_matrix(const EmbeddingBatch& batch, double temperature) {
  std::vector<double> norms;
  const auto unit = unit_rows(batch, norms);
  return gram(unit, batch.count, batch.dim, temperature);
}

double pair_loss(std::size_t i, std::size_t j, const SimilarityMatrix& m) {
  if (i >= m.size || j >= m.size || i == j) {
    fail(ErrorCode::IndexOutOfRange, "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                         ") invalid for " + std::to_string(m.size) + " embeddings");
  }
  return row_softmax(m, i, nullptr) - m(i, j) / m.temperature;
}

BatchLoss batch_loss(const EmbeddingBatch& batch, double temperature, LossMode mode) {
  return batch_loss_with_grad(batch, temperature, mode).value;
}

BatchLossGradient batch_loss_with_grad(const EmbeddingBatch& batch, double temperature, LossMode mode) {
  check_batch(batch, temperature);
  const std::size_t n2 = batch.count;
  const std::size_t n = n2 / 2;
  const std::size_t dim = batch.dim;
  std::vector<double> norms;
  const auto unit = unit_rows(batch, norms);
  const auto m = gram(unit, n2, dim, temperature);

  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < n; ++i) anchors.push_back(i);
  if (mode == LossMode::Symmetric) {
    for (std::size_t i = n; i < n2; ++i) anchors.push_back(i);
  }
  const double weight = 1.0 / static_cast<double>(anchors.size());

  BatchLossGradient out;
  out.value.pair_losses.reserve(anchors.size());
  std::vector<double> g(n2 * n2, 0.0);  // d loss / d M
  std::vector<double> probs;
  double total = 0.0;
  for (auto a : anchors) {
    const std::size_t p = a < n ? a + n : a - n;
    const double l = row_softmax(m, a, &probs) - m(a, p) / temperature;
    out.value.pair_losses.push_back(l);
    total += l;
    for (std::size_t k = 0; k < n2; ++k) {
      if (k == a) continue;
      g[a * n2 + k] += weight * (probs[k] - (k == p ? 1.0 : 0.0)) / temperature;
    }
  }
  out.value.loss = total * weight;

  // M[a, k] = u_a . u_k contributes to both unit vectors.
  std::vector<double> du(n2 * dim, 0.0);
  for (std::size_t a = 0; a < n2; ++a) {
    for (std::size_t k = 0; k < n2; ++k) {
      const double gak = g[a * n2 + k];
      if (gak == 0.0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        du[a * dim + d] += gak * unit[k * dim + d];
        du[k * dim + d] += gak * unit[a * dim + d];
      }
    }
  }
  out.grad.assign(n2 * dim, 0.0);
  for (std::size_t i = 0; i < n2; ++i) {
    double radial = 0.0;
    for (std::size_t d = 0; d < dim; ++d) radial += unit[i * dim + d] * du[i * dim + d];
    for (std::size_t d = 0; d < dim; ++d) {
      out.grad[i * dim + d] = (du[i * dim + d] - unit[i * dim + d] * radial) / norms[i];
    }
  }
  return out;
}

}  // namespace eegssl
