#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "eegssl/errors.hpp"
#include "eegssl/epochs.hpp"
#include "eegssl/transforms.hpp"
#include "fixtures.hpp"

using namespace eegssl;

namespace {

Signal ramp(std::size_t n, double lo = 0.0, double hi = 1.0) {
  Signal x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

Signal noise(std::uint64_t seed, std::size_t n = kEpochLength) {
  RngStream rng(seed, {99});
  Signal x(n);
  for (auto& v : x) v = rng.normal(0.0, 1.0);
  return x;
}

double max_abs_diff(const Signal& a, const Signal& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("transforms") {

TEST_CASE("boundaries are sorted, complete and respect the minimum segment length") {
  RngStream rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.uniform_int(1, 8);
    const auto b = random_boundaries(kEpochLength, n, rng);
    REQUIRE(b.size() == static_cast<std::size_t>(n) + 1);
    CHECK(b.front() == 0);
    CHECK(b.back() == kEpochLength);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] - b[i - 1] >= 8);
  }
  const auto tight = random_boundaries(10, 5, rng);
  CHECK(tight == std::vector<std::size_t>{0, 2, 4, 6, 8, 10});
  CHECK_THROWS_AS(random_boundaries(5, 3, rng), Error);
}

TEST_CASE("boundary draw is uniform over compositions") {
  RngStream rng(2);
  std::array<int, 7> counts{};
  const int trials = 7000;
  for (int t = 0; t < trials; ++t) {
    const auto b = random_boundaries(22, 2, rng);  // min 8, slack 6 -> first cut in 8..14
    counts[b[1] - 8]++;
  }
  for (int c : counts) CHECK(std::abs(c - trials / 7) < 150);

  std::array<int, 5> wide{};
  for (int t = 0; t < 5000; ++t) wide[random_boundaries(40, 2, rng, 18)[1] - 18]++;
  for (int c : wide) CHECK(std::abs(c - 1000) < 120);
}

TEST_CASE("time warp") {
  const auto x = ramp(kEpochLength);
  TransformSpec unit = TransformSpec::defaults(TransformKind::TimeWarp);
  unit.scale_lo = unit.scale_hi = 1.0;
  RngStream rng(4);
  CHECK(max_abs_diff(time_warp(x, unit, rng), x) < 1e-9);

  const std::vector<std::size_t> mid{0, 1536, 3072};
  const std::vector<double> factors{2.0, 0.5};
  const Signal first(x.begin(), x.begin() + 1536);
  const Signal second(x.begin() + 1536, x.end());
  auto joined = fixtures::lerp_resample(first, 768);
  const auto s2 = fixtures::lerp_resample(second, 3072);
  joined.insert(joined.end(), s2.begin(), s2.end());
  const auto oracle = fixtures::lerp_resample(joined, kEpochLength);
  CHECK(max_abs_diff(warp_segments(x, mid, factors), oracle) < 1e-12);
}

TEST_CASE("gaussian noise") {
  const auto x = noise(1);
  TransformSpec off = TransformSpec::defaults(TransformKind::GaussianNoise);
  off.sigma_ratio = 0.0;
  RngStream rng(5);
  CHECK(gaussian_noise(x, off, rng) == x);

  const auto unit = normalize(x);  // variance 0.5, rescale to std 1
  Signal s(unit.size());
  std::transform(unit.begin(), unit.end(), s.begin(), [](double v) { return v * std::sqrt(2.0); });
  const auto spec = TransformSpec::defaults(TransformKind::GaussianNoise);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream r(seed);
    const auto y = gaussian_noise(s, spec, r);
    double mean = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) mean += y[i] - s[i];
    mean /= static_cast<double>(s.size());
    CHECK(std::abs(mean) < 4 * 0.1 / std::sqrt(3072.0));
  }
  const Signal zero(kEpochLength, 0.0);
  CHECK(gaussian_noise(zero, spec, rng) == zero);
}

TEST_CASE("horizontal flip") {
  CHECK(horizontal_flip(Signal{1, 2, 3}) == Signal{3, 2, 1});
  CHECK(horizontal_flip(Signal{1, 2, 3, 4}) == Signal{4, 3, 2, 1});
  const auto x = noise(2);
  CHECK(horizontal_flip(horizontal_flip(x)) == x);
}

TEST_CASE("permutation") {
  const Signal x{1, 2, 3, 4};
  const std::vector<std::size_t> mid{0, 2, 4};
  CHECK(permute_segments(x, mid, std::vector<std::size_t>{1, 0}) == Signal{3, 4, 1, 2});
  CHECK(permute_segments(x, mid, std::vector<std::size_t>{0, 1}) == x);
  CHECK_THROWS_AS(permute_segments(x, mid, std::vector<std::size_t>{1, 1}), Error);
}

TEST_CASE("cutout resize") {
  const auto x = ramp(kEpochLength);
  const std::vector<std::size_t> halves{0, 1536, 3072};
  const Signal kept(x.begin(), x.begin() + 1536);
  CHECK(max_abs_diff(cutout_segment(x, halves, 1), fixtures::lerp_resample(kept, kEpochLength)) < 1e-12);
  const Signal c(kEpochLength, 2.5);
  RngStream rng(6);
  for (double v : cutout_resize(c, TransformSpec::defaults(TransformKind::CutoutResize), rng)) CHECK(v == 2.5);
}

TEST_CASE("crop resize") {
  const auto x = ramp(kEpochLength);
  TransformSpec whole = TransformSpec::defaults(TransformKind::CropResize);
  whole.num_segments = {1, 1};
  RngStream rng(7);
  CHECK(max_abs_diff(crop_resize(x, whole, rng), x) < 1e-9);
  const std::vector<std::size_t> halves{0, 1536, 3072};
  const auto first = crop_segment(x, halves, 0);
  const Signal kept(x.begin(), x.begin() + 1536);
  CHECK(max_abs_diff(first, fixtures::lerp_resample(kept, kEpochLength)) < 1e-12);
  // the kept half [0, x[1535]] is stretched linearly over the full length
  for (std::size_t t = 0; t < kEpochLength; t += 97) CHECK(std::abs(first[t] - x[1535] * t / 3071.0) < 1e-12);

  // a crop keeps at least a quarter of the input: the output slope of a
  // unit ramp is at most 4x the input slope
  const auto spec = TransformSpec::defaults(TransformKind::CropResize);
  for (int trial = 0; trial < 300; ++trial) {
    const auto y = crop_resize(x, spec, rng);
    CHECK(y[1] - y[0] <= 4.0 * (x[1] - x[0]) + 1e-12);
  }
}

TEST_CASE("average filter") {
  const Signal c(50, -1.25);
  for (int k = 1; k <= 10; ++k) {
    for (double v : moving_average(c, k)) CHECK(v == doctest::Approx(-1.25).epsilon(1e-15));
  }
  Signal impulse(20, 0.0);
  impulse[10] = 1.0;
  const auto y = moving_average(impulse, 3);
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double want = (t >= 8 && t <= 10) ? 1.0 / 3.0 : 0.0;
    CHECK(y[t] == doctest::Approx(want).epsilon(1e-15));
  }
  const auto r = ramp(100, 0.0, 99.0);
  for (int k = 3; k <= 10; ++k) {
    const auto z = moving_average(r, k);
    for (std::size_t t = 0; t + k <= r.size(); ++t) CHECK(std::abs(z[t] - (r[t] + (k - 1) / 2.0)) < 1e-12);
  }
}

TEST_CASE("make_view_pair") {
  Epoch e{std::vector<float>(kEpochLength), StageLabel::W, "x"};
  const auto src = noise(3);
  std::copy(src.begin(), src.end(), e.samples.begin());
  const auto id = TransformSpec::defaults(TransformKind::Identity);
  const auto [a, b] = make_view_pair(e, id, id, RngStream(1));
  const Signal x(e.samples.begin(), e.samples.end());
  CHECK(a == x);
  CHECK(b == x);

  const auto crop = TransformSpec::defaults(TransformKind::CropResize);
  const auto perm = TransformSpec::defaults(TransformKind::Permutation);
  const auto p1 = make_view_pair(e, crop, perm, RngStream(42, {3, 4}));
  const auto p2 = make_view_pair(e, crop, perm, RngStream(42, {3, 4}));
  CHECK(p1 == p2);
  CHECK(p1.first.size() == kEpochLength);
  CHECK(p1.second.size() == kEpochLength);
  // the two views use independent streams
  const auto same = make_view_pair(e, perm, perm, RngStream(42));
  CHECK(same.first != same.second);
}

TEST_CASE("spec validation and names") {
  for (auto kind : {TransformKind::Identity, TransformKind::TimeWarp, TransformKind::GaussianNoise,
                    TransformKind::HorizontalFlip, TransformKind::Permutation, TransformKind::CutoutResize,
                    TransformKind::CropResize, TransformKind::AverageFilter}) {
    CHECK(transform_kind_from_string(to_string(kind)) == kind);
    CHECK_NOTHROW(TransformSpec::defaults(kind).validate());
  }
  auto bad = TransformSpec::defaults(TransformKind::CutoutResize);
  bad.num_segments = {1, 3};
  CHECK_THROWS_AS(bad.validate(), Error);
  auto warp = TransformSpec::defaults(TransformKind::TimeWarp);
  warp.scale_lo = 0.0;
  CHECK_THROWS_AS(warp.validate(), Error);
  CHECK_THROWS_AS(transform_kind_from_string("rotate"), Error);
  RngStream rng(1);
  CHECK_THROWS_AS(permutation(Signal(5, 1.0), TransformSpec::defaults(TransformKind::Permutation), rng), Error);
}

}  // TEST_SUITE
