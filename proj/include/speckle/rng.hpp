#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace speckle {

// Deterministic, platform-independent random stream (xoshiro256++ seeded via
// splitmix64). std facilities are avoided on purpose: normal_distribution et
// al. are implementation-defined, and dataset reproducibility is a contract.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller (pairwise, one value cached).
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson sample. Knuth product method for small means, Hormann's PTRS
  // transformed rejection for large ones (exact distribution, O(1) time).
  int64_t next_poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) {
      double limit = std::exp(-lambda);
      double prod = next_unit();
      int64_t k = 0;
      while (prod > limit) {
        prod *= next_unit();
        ++k;
      }
      return k;
    }
    // PTRS (Hormann 1993).
    const double b = 0.931 + 2.53 * std::sqrt(lambda);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = next_unit() - 0.5;
      double v = next_unit();
      double us = 0.5 - std::abs(u);
      double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= vr) return int64_t(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          k * std::log(lambda) - lambda - std::lgamma(k + 1.0)) {
        return int64_t(k);
      }
    }
  }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// FNV-1a, used for seed derivation and content fingerprints.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based seed splitting: child streams for a named domain never
// collide with each other or with the master stream.
inline uint64_t derive_seed(uint64_t master, std::string_view domain, uint64_t counter) {
  uint64_t x = master ^ fnv1a64(domain);
  uint64_t h = Rng::splitmix64(x);
  x = h + counter * 0x9e3779b97f4a7c15ULL;
  return Rng::splitmix64(x);
}

}  // namespace speckle
