#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace graspbench::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: the value depends only on (seed, stream, counter),
/// so pixels can be generated in any order or in parallel.
constexpr std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(seed ^ mix64(stream)) + counter);
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two uniforms drawn from counters 2k and 2k+1.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t k) {
  const double u1 = 1.0 - uniform(seed, stream, 2 * k);  // (0, 1]
  const double u2 = uniform(seed, stream, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Derives an independent seed for sub-experiment @p index.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ (index * 0x9E3779B97F4A7C15ULL));
}

}  // namespace graspbench::rng
