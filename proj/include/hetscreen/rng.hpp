#pragma once

#include <cstdint>
#include <random>

namespace hetscreen {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed splitting: the seed for (stream, index) depends only on
/// the master seed, never on scheduling or on how many values were drawn
/// elsewhere.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(master) ^ (stream * 0xd1b54a32d192ed03ULL)) ^ index);
}

// Named streams so that independent consumers never share random numbers.
namespace streams {
inline constexpr std::uint64_t folds = 1;
inline constexpr std::uint64_t inner_folds = 2;
inline constexpr std::uint64_t permutation = 3;
inline constexpr std::uint64_t mvn = 4;
inline constexpr std::uint64_t covariates = 5;
inline constexpr std::uint64_t arms = 6;
inline constexpr std::uint64_t noise = 7;
inline constexpr std::uint64_t repetition = 8;
inline constexpr std::uint64_t calibration = 9;
inline constexpr std::uint64_t scale = 10;
}  // namespace streams

inline Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

}  // namespace hetscreen
