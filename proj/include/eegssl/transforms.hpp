#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eegssl/epochs.hpp"
#include "eegssl/rng.hpp"

namespace eegssl {

enum class TransformKind {
  Identity,
  TimeWarp,
  GaussianNoise,
  HorizontalFlip,
  Permutation,
  CutoutResize,
  CropResize,
  AverageFilter,
};

std::string_view to_string(TransformKind kind);
/// Accepts the snake_case names used in config files ("crop_resize", ...).
TransformKind transform_kind_from_string(std::string_view name);

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool operator==(const IntRange&) const = default;
};

/// One stochastic transformation and the ranges its parameters are drawn from.
/// Fields that do not apply to `kind` are ignored.
struct TransformSpec {
  TransformKind kind = TransformKind::Identity;
  IntRange num_segments{1, 1};
  double scale_lo = 0.25;  // time warp factor range
  double scale_hi = 4.0;
  double mu = 0.0;  // gaussian noise; sigma = sigma_ratio * std(x)
  double sigma_ratio = 0.1;
  IntRange filter_length{3, 10};

  static TransformSpec defaults(TransformKind kind);
  /// Throws InvalidSpec.
  void validate() const;
  bool operator==(const TransformSpec&) const = default;
};

using Signal = std::vector<double>;

/// Segment boundaries [0, b1, ..., L] for `n` segments, uniform over all
/// splits whose segments have at least min(m, L / n) samples, where m is
/// `min_segment` or 8 when that is 0. crop_resize passes L / 4 so the kept
/// segment is at least a quarter of the signal whenever n <= 4.
std::vector<std::size_t> random_boundaries(std::size_t length, int n, RngStream& rng, std::size_t min_segment = 0);

// Deterministic cores, parameterized by explicit draws.
Signal warp_segments(std::span<const double> x, std::span<const std::size_t> boundaries,
                     std::span<const double> factors);
Signal permute_segments(std::span<const double> x, std::span<const std::size_t> boundaries,
                        std::span<const std::size_t> order);
Signal cutout_segment(std::span<const double> x, std::span<const std::size_t> boundaries, std::size_t dropped);
Signal crop_segment(std::span<const double> x, std::span<const std::size_t> boundaries, std::size_t kept);
/// Forward window [t, t+k-1], the tail replicates the last sample.
Signal moving_average(std::span<const double> x, int k);

Signal time_warp(std::span<const double> x, const TransformSpec& spec, RngStream& rng);
Signal gaussian_noise(std::span<const double> x, const TransformSpec& spec, RngStream& rng);
Signal horizontal_flip(std::span<const double> x);
Signal permutation(std::span<const double> x, const TransformSpec& spec, RngStream& rng);
Signal cutout_resize(std::span<const double> x, const TransformSpec& spec, RngStream& rng);
Signal crop_resize(std::span<const double> x, const TransformSpec& spec, RngStream& rng);
Signal average_filter(std::span<const double> x, const TransformSpec& spec, RngStream& rng);

Signal apply_transform(std::span<const double> x, const TransformSpec& spec, RngStream& rng);

/// T1(x), T2(x) with independent draws: view 1 uses rng.derive(1), view 2 rng.derive(2).
std::pair<Signal, Signal> make_view_pair(const Epoch& epoch, const TransformSpec& t1, const TransformSpec& t2,
                                         const RngStream& rng);

}  // namespace eegssl
