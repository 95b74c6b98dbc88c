#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace simuda {

// Engine used for every stochastic draw in the toolkit.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combine a base seed with stream coordinates (epoch, index, tag...).
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Parts... parts) noexcept {
  std::uint64_t s = mix_seed(base);
  ((s = mix_seed(s ^ static_cast<std::uint64_t>(parts))), ...);
  return s;
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [lo, hi] inclusive.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(span));
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Standard normal draw (Box-Muller, one value per call).
inline double normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Normal(0, std) truncated to [-2 std, 2 std] by resampling.
inline double truncated_normal(Rng& rng, double std) {
  for (;;) {
    const double z = normal(rng);
    if (z >= -2.0 && z <= 2.0) return z * std;
  }
}

}  // namespace simuda
