#pragma once
// Deterministic randomness plumbing. Sampling intervals and transmission
// delays must reproduce bit-for-bit across runs and toolchains, so draws
// avoid std::uniform_real_distribution (its algorithm is not pinned by the
// standard) and build doubles from the top 53 bits of the engine output.

#include <cstdint>
#include <random>

namespace nqcs {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Uniform in [0, 1).
[[nodiscard]] inline double unit_uniform(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform in [lo, hi). Degenerate ranges return lo.
[[nodiscard]] inline double uniform_in(std::mt19937_64& eng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return lo + (hi - lo) * unit_uniform(eng);
}

/// Independent engine for stream `stream` of run seed `seed`; one stream per
/// network keeps draw sequences stable when unrelated networks are edited.
[[nodiscard]] inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64{splitmix64(seed ^ splitmix64(stream + 1))};
}

}  // namespace nqcs
