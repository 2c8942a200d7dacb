#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

#include "mpp/errors.hpp"

namespace mpp {

// splitmix64 finalizer. Statistical quality only, not cryptographic.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Counter-mode generator: output i is mix64(key + i*golden), so a generator is a
// pure function of (key, counter) and replay never depends on call-site history.
struct Rng {
  std::uint64_t key = 0;
  std::uint64_t ctr = 0;
  bool has_spare = false;
  double spare = 0.0;

  std::uint64_t next_u64() { return mix64(key + (++ctr) * kGolden); }

  // uniform on [0,1), 53-bit resolution
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1], safe to pass to log()
  double u01p() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw invalid_parameter("Rng::below: empty range");
    std::uint64_t mask = ~0ull >> std::countl_zero(n | 1);
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < n) return v;
    }
  }

  double expo() { return -std::log(u01p()); }

  double normal();                  // Box-Muller, caches the spare value
  std::uint64_t poisson(double mean);
};

// Hierarchical seed derivation: a stream is identified by (master, path of indices)
// and children are split off by hashing, so sibling streams never share a key by
// construction. Keys, not sequences, are what get passed around.
struct SeedStream {
  std::uint64_t key = 0;

  static SeedStream root(std::uint64_t master) {
    return {mix64(master ^ 0x5851F42D4C957F2Dull)};
  }
  SeedStream child(std::uint64_t idx) const {
    return {mix64(key ^ mix64(idx + kGolden))};
  }
  Rng rng() const { return Rng{key, 0, false, 0.0}; }
};

}  // namespace mpp
