#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sbmsir {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for run r of an ensemble: base_seed xor hash(r), then mixed once more
// so that neighbouring base seeds do not share streams.
constexpr std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t run) noexcept {
  return splitmix64(base_seed ^ splitmix64(run));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline double exponential(Rng& rng, double rate) {
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform01(rng)) / rate;
}

}  // namespace sbmsir
