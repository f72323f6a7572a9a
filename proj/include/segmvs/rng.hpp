#pragma once

#include <cstdint>

namespace segmvs {

/// SplitMix64: small, seedable, and stateless enough to derive independent
/// per-pixel streams from a single run seed, which keeps every stochastic
/// choice reproducible regardless of thread schedule.
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
};

/// Order-sensitive mix of a seed with stream identifiers (layer, view, pixel...).
inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  return g.next();
}

template <typename... Rest>
uint64_t hash_mix(uint64_t a, uint64_t b, Rest... rest) {
  return hash_mix(hash_mix(a, b), uint64_t(rest)...);
}

}  // namespace segmvs
