#pragma once

#include <cstdint>
#include <random>

namespace frontier::rng {

/// SplitMix64 finalizer; used to derive well-mixed substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

/// Deterministic per-draw substream: the same (seed, stream) pair always
/// yields the same engine state, independent of how many other streams
/// were consumed.  Batches can therefore be filled in any order.
inline Engine substream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  const std::uint64_t b = splitmix64(a + stream);
  std::seed_seq seq{static_cast<unsigned>(b), static_cast<unsigned>(b >> 32),
                    static_cast<unsigned>(a), static_cast<unsigned>(a >> 32)};
  return Engine(seq);
}

inline double standard_normal(Engine& eng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(eng);
}

inline double uniform(Engine& eng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(eng);
}

inline double chi_squared(Engine& eng, double dof) {
  std::gamma_distribution<double> d(dof / 2.0, 2.0);
  return d(eng);
}

}  // namespace frontier::rng
