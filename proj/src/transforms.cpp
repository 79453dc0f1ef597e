#include "eegssl/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eegssl/errors.hpp"

namespace eegssl {
namespace {

constexpr std::size_t kMinSegment = 8;

void require_segments(std::size_t length, int n) {
  if (n < 1 || length < 2 * static_cast<std::size_t>(n)) {
    fail(ErrorCode::InputTooShort, "cannot split " + std::to_string(length) + " samples into " +
                                       std::to_string(n) + " segments");
  }
}

void check_boundaries(std::span<const double> x, std::span<const std::size_t> b) {
  if (b.size() < 2 || b.front() != 0 || b.back() != x.size() ||
      !std::is_sorted(b.begin(), b.end()) || std::adjacent_find(b.begin(), b.end()) != b.end()) {
    fail(ErrorCode::InvalidSpec, "segment boundaries must increase strictly from 0 to the signal length");
  }
}

// Resampling that tolerates 1-sample inputs by repetition.
Signal stretch(std::span<const double> x, std::size_t target) {
  if (x.size() < 2 || target < 2) return Signal(std::max<std::size_t>(target, 1), x.empty() ? 0.0 : x[0]);
  return resample(x, target);
}

int draw_segments(const TransformSpec& spec, RngStream& rng) {
  return rng.uniform_int(spec.num_segments.lo, spec.num_segments.hi);
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::TimeWarp: return "time_warp";
    case TransformKind::GaussianNoise: return "gaussian_noise";
    case TransformKind::HorizontalFlip: return "horizontal_flip";
    case TransformKind::Permutation: return "permutation";
    case TransformKind::CutoutResize: return "cutout_resize";
    case TransformKind::CropResize: return "crop_resize";
    case TransformKind::AverageFilter: return "average_filter";
  }
  return "identity";
}

TransformKind transform_kind_from_string(std::string_view name) {
  for (auto kind : {TransformKind::Identity, TransformKind::TimeWarp, TransformKind::GaussianNoise,
                    TransformKind::HorizontalFlip, TransformKind::Permutation, TransformKind::CutoutResize,
                    TransformKind::CropResize, TransformKind::AverageFilter}) {
    if (to_string(kind) == name) return kind;
  }
  fail(ErrorCode::InvalidSpec, "unknown transform '" + std::string(name) + "'");
}

TransformSpec TransformSpec::defaults(TransformKind kind) {
  TransformSpec spec;
  spec.kind = kind;
  switch (kind) {
    case TransformKind::TimeWarp:
    case TransformKind::Permutation:
      spec.num_segments = {4, 8};
      break;
    case TransformKind::CutoutResize:
      spec.num_segments = {3, 6};
      break;
    case TransformKind::CropResize:
      spec.num_segments = {2, 4};
      break;
    default:
      break;
  }
  return spec;
}

void TransformSpec::validate() const {
  const auto bad = [&](const std::string& why) {
    fail(ErrorCode::InvalidSpec, std::string(to_string(kind)) + ": " + why);
  };
  switch (kind) {
    case TransformKind::TimeWarp:
      if (!(scale_lo > 0.0) || !(scale_hi >= scale_lo) || !std::isfinite(scale_hi)) {
        bad("scale range must satisfy 0 < lo <= hi < inf");
      }
      [[fallthrough]];
    case TransformKind::Permutation:
    case TransformKind::CropResize:
      if (num_segments.lo < 1 || num_segments.hi < num_segments.lo) bad("num_segments range invalid");
      break;
    case TransformKind::CutoutResize:
      if (num_segments.lo < 2 || num_segments.hi < num_segments.lo) bad("cutout needs at least 2 segments");
      break;
    case TransformKind::GaussianNoise:
      if (!(sigma_ratio >= 0.0) || !std::isfinite(mu)) bad("sigma_ratio must be >= 0 and mu finite");
      break;
    case TransformKind::AverageFilter:
      if (filter_length.lo < 1 || filter_length.hi < filter_length.lo) bad("filter length range invalid");
      break;
    case TransformKind::Identity:
    case TransformKind::HorizontalFlip:
      break;
  }
}

std::vector<std::size_t> random_boundaries(std::size_t length, int n, RngStream& rng, std::size_t min_segment) {
  require_segments(length, n);
  const auto segments = static_cast<std::size_t>(n);
  const std::size_t min_len = std::min(min_segment == 0 ? kMinSegment : min_segment, length / segments);
  const std::size_t slack = length - min_len * segments;
  // Stars and bars: n-1 distinct picks from slack+n-1 slots give a uniform
  // composition of the slack into n non-negative extras.
  std::vector<std::size_t> slots(slack + segments - 1);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  std::vector<std::size_t> picks;
  picks.reserve(segments - 1);
  for (std::size_t i = 0; i + 1 < segments; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(slots.size() - 1 - i)));
    std::swap(slots[i], slots[j]);
    picks.push_back(slots[i]);
  }
  std::sort(picks.begin(), picks.end());
  std::vector<std::size_t> bounds{0};
  std::size_t prev_extra = 0;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const std::size_t extra_total = picks[i] - i;  // extras assigned to the first i+1 segments
    bounds.push_back(bounds.back() + min_len + (extra_total - prev_extra));
    prev_extra = extra_total;
  }
  bounds.push_back(length);
  return bounds;
}

Signal warp_segments(std::span<const double> x, std::span<const std::size_t> boundaries,
                     std::span<const double> factors) {
  check_boundaries(x, boundaries);
  if (factors.size() + 1 != boundaries.size()) fail(ErrorCode::InvalidSpec, "one warp factor per segment");
  Signal joined;
  for (std::size_t s = 0; s < factors.size(); ++s) {
    const auto seg = x.subspan(boundaries[s], boundaries[s + 1] - boundaries[s]);
    if (!(factors[s] > 0.0)) fail(ErrorCode::InvalidSpec, "warp factor must be positive");
    const auto target = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(static_cast<double>(seg.size()) / factors[s])));
    const auto warped = seg.size() == target ? Signal(seg.begin(), seg.end()) : stretch(seg, target);
    joined.insert(joined.end(), warped.begin(), warped.end());
  }
  return stretch(joined, x.size());
}

Signal permute_segments(std::span<const double> x, std::span<const std::size_t> boundaries,
                        std::span<const std::size_t> order) {
  check_boundaries(x, boundaries);
  const std::size_t n = boundaries.size() - 1;
  std::vector<std::size_t> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != n || sorted[i] != i) fail(ErrorCode::InvalidSpec, "order is not a permutation");
  }
  Signal out;
  out.reserve(x.size());
  for (auto s : order) out.insert(out.end(), x.begin() + boundaries[s], x.begin() + boundaries[s + 1]);
  return out;
}

Signal cutout_segment(std::span<const double> x, std::span<const std::size_t> boundaries, std::size_t dropped) {
  check_boundaries(x, boundaries);
  if (dropped + 1 >= boundaries.size() || boundaries.size() < 3) {
    fail(ErrorCode::IndexOutOfRange, "cutout needs at least 2 segments and a valid index");
  }
  Signal kept(x.begin(), x.begin() + boundaries[dropped]);
  kept.insert(kept.end(), x.begin() + boundaries[dropped + 1], x.end());
  return stretch(kept, x.size());
}

Signal crop_segment(std::span<const double> x, std::span<const std::size_t> boundaries, std::size_t kept) {
  check_boundaries(x, boundaries);
  if (kept + 1 >= boundaries.size()) fail(ErrorCode::IndexOutOfRange, "crop segment index out of range");
  return stretch(x.subspan(boundaries[kept], boundaries[kept + 1] - boundaries[kept]), x.size());
}

Signal moving_average(std::span<const double> x, int k) {
  if (k < 1) fail(ErrorCode::InvalidSpec, "filter length must be positive");
  const std::size_t n = x.size();
  Signal out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += x[std::min(t + static_cast<std::size_t>(i), n - 1)];
    out[t] = sum / k;
  }
  return out;
}

Signal time_warp(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  const int n = draw_segments(spec, rng);
  const auto bounds = random_boundaries(x.size(), n, rng);
  std::vector<double> factors(static_cast<std::size_t>(n));
  for (auto& f : factors) f = rng.uniform(spec.scale_lo, spec.scale_hi);
  return warp_segments(x, bounds, factors);
}

Signal gaussian_noise(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  const double sigma = spec.sigma_ratio * std::sqrt(variance_of(x));
  Signal out(x.begin(), x.end());
  if (sigma == 0.0 && spec.mu == 0.0) return out;
  for (auto& v : out) v += rng.normal(spec.mu, sigma);
  return out;
}

Signal horizontal_flip(std::span<const double> x) { return Signal(x.rbegin(), x.rend()); }

Signal permutation(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  const int n = draw_segments(spec, rng);
  const auto bounds = random_boundaries(x.size(), n, rng);
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  return permute_segments(x, bounds, order);
}

Signal cutout_resize(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  const int n = draw_segments(spec, rng);
  if (n < 2) fail(ErrorCode::InvalidSpec, "cutout needs at least 2 segments");
  const auto bounds = random_boundaries(x.size(), n, rng);
  return cutout_segment(x, bounds, static_cast<std::size_t>(rng.uniform_int(0, n - 1)));
}

Signal crop_resize(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  const int n = draw_segments(spec, rng);
  const auto bounds = random_boundaries(x.size(), n, rng, x.size() / 4);
  return crop_segment(x, bounds, static_cast<std::size_t>(rng.uniform_int(0, n - 1)));
}

Signal average_filter(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  return moving_average(x, rng.uniform_int(spec.filter_length.lo, spec.filter_length.hi));
}

Signal apply_transform(std::span<const double> x, const TransformSpec& spec, RngStream& rng) {
  spec.validate();
  switch (spec.kind) {
    case TransformKind::Identity: return Signal(x.begin(), x.end());
    case TransformKind::TimeWarp: return time_warp(x, spec, rng);
    case TransformKind::GaussianNoise: return gaussian_noise(x, spec, rng);
    case TransformKind::HorizontalFlip: return horizontal_flip(x);
    case TransformKind::Permutation: return permutation(x, spec, rng);
    case TransformKind::CutoutResize: return cutout_resize(x, spec, rng);
    case TransformKind::CropResize: return crop_resize(x, spec, rng);
    case TransformKind::AverageFilter: return average_filter(x, spec, rng);
  }
  return Signal(x.begin(), x.end());
}

std::pair<Signal, Signal> make_view_pair(const Epoch& epoch, const TransformSpec& t1, const TransformSpec& t2,
                                         const RngStream& rng) {
  const Signal x(epoch.samples.begin(), epoch.samples.end());
  auto r1 = rng.derive(1);
  auto r2 = rng.derive(2);
  return {apply_transform(x, t1, r1), apply_transform(x, t2, r2)};
}

}  // namespace eegssl
