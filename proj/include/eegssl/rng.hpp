#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace eegssl {

/// Seeded random stream addressed by (seed, stream ids). Two streams built
/// from the same seed and the same id path produce identical draws, so
/// per-(epoch, view) randomness is independent of evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_ids = {});

  /// Child stream; does not advance this one.
  RngStream derive(std::uint64_t stream_id) const;

  std::uint64_t seed() const noexcept { return key_; }

  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi]
  int uniform_int(int lo, int hi);        // inclusive
  double normal(double mean, double stddev);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace eegssl
