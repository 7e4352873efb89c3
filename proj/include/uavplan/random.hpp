#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace uavplan {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
  return mix_seed(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_indices(std::uint64_t seed, std::span<const std::size_t> values) {
  std::uint64_t h = mix_seed(seed);
  for (auto v : values) h = combine_seed(h, v);
  return h;
}

/// Seeded generator whose output is identical on every platform: the engine
/// is std::mt19937_64 (fully specified by the standard) and all derived
/// variates are computed here rather than by the implementation-defined
/// standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    // Rejection sampling keeps this unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

  /// Poisson variate by Knuth's product method, in chunks so exp(-mean)
  /// never underflows.
  std::uint64_t poisson(double mean) {
    constexpr double kChunk = 500.0;
    std::uint64_t total = 0;
    while (mean > 0.0) {
      const double part = mean > kChunk ? kChunk : mean;
      mean -= part;
      const double limit = std::exp(-part);
      double prod = uniform();
      while (prod > limit) {
        ++total;
        prod *= uniform();
      }
    }
    return total;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace uavplan
