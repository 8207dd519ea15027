#pragma once

#include <cstdint>
#include <cmath>

#include "gapfilter/common.hpp"

namespace gapfilter {

// Counter-based generator: every draw is a pure function of (seed, stream,
// counter), so path simulation is reproducible bit-for-bit regardless of
// evaluation order and safe to parallelize.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (counter * 0x9e3779b97f4a7c15ULL));
  return h;
}

/// Uniform in (0,1): 53-bit mantissa, never exactly 0.
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t bits = mix(seed, stream, counter);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on counter pairs (2*counter, 2*counter+1).
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const double u1 = uniform(seed, stream, 2 * counter);
  const double u2 = uniform(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

}  // namespace rng
}  // namespace gapfilter
