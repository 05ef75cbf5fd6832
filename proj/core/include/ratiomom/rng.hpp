#pragma once

#include <cstdint>
#include <random>

namespace ratiomom {

using Rng = std::mt19937_64;

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on (0, 1].
inline double uniform_open0(Rng& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for stream `index` of a run seeded with `seed`. Streams are a
/// pure function of (seed, index), so any partition of indices over threads
/// reproduces the same draws.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace ratiomom
