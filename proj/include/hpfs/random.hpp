#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hpfs {

using Rng = std::mt19937_64;

// Mixes a list of integers into one 64-bit seed. Used to derive independent
// substreams, e.g. (master, method, run, fold) or (seed, particle, iteration),
// so results do not depend on evaluation order or thread count.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

inline Rng make_rng(std::initializer_list<std::uint64_t> parts) {
  return Rng(derive_seed(parts));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace hpfs
