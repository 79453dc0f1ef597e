#include "eegssl/rng.hpp"

namespace eegssl {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_ids)
    : key_(splitmix64(seed)) {
  for (auto id : stream_ids) key_ = splitmix64(key_ ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  engine_.seed(key_);
}

RngStream RngStream::derive(std::uint64_t stream_id) const {
  RngStream child(0);
  child.key_ = splitmix64(key_ ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
  child.engine_.seed(child.key_);
  return child;
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

int RngStream::uniform_int(int lo, int hi) {
  if (lo == hi) return lo;
  return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

double RngStream::normal(double mean, double stddev) {
  if (stddev == 0.0) return mean;
  return std::normal_distribution<double>(mean, stddev)(engine_);
}

}  // namespace eegssl
