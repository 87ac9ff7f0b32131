#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace maxland {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `parent`: splitmix64(parent ^ splitmix64(index)).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return splitmix64(parent ^ splitmix64(index));
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; platform independent.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform angle in [0, 2*pi).
inline double uniform_angle(Rng& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double a = two_pi * uniform01(rng);
  return a < two_pi ? a : std::nextafter(two_pi, 0.0);
}

}  // namespace maxland
