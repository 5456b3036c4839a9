#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gaugetc {

/// Deterministic distribution helpers on top of mt19937_64. The standard
/// distribution adaptors are implementation-defined, so seeded outputs would
/// not be stable across standard libraries; these are.
inline uint64_t mix64(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Unbiased draw from [0, bound) by rejection.
inline uint64_t uniform_below(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

/// Uniform double in (0, 1].
inline double uniform_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}

/// Standard normal via Box-Muller (cosine branch).
inline double normal(std::mt19937_64& rng) {
  const double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

/// Exponential(1).
inline double exponential(std::mt19937_64& rng) { return -std::log(uniform_unit(rng)); }

}  // namespace gaugetc
