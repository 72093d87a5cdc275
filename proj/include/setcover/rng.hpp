#pragma once

#include <cstdint>
#include <random>

namespace setcover {

using Rng = std::mt19937_64;

/// Derives an independent seed for sub-stream `stream` of `master`
/// (splitmix64 finalizer over the combined words).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(split_seed(master, stream));
}

}  // namespace setcover
