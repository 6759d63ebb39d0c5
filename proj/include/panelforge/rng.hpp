#pragma once

// Seeded RNG streams. Trials derive independent streams from (base seed,
// stream index) via SplitMix64 so parallel trials never share state and
// results do not depend on execution order.

#include <cstdint>
#include <random>

namespace panelforge {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream for trial `index` under a base seed.
  static Rng stream(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(splitmix64(base_seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ull + 1));
  }

  /// Uniform double in [0, 1) with 53 random bits; stable across platforms.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased and deterministic.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace panelforge
