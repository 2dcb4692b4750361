#pragma once

#include <cstdint>
#include <random>

namespace tech {

/// splitmix64 finalizer; decorrelates nearby inputs.
inline std::uint64_t mix_bits(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed from a base seed and stream indices,
/// so per-subject / per-sample generators can be split deterministically.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix_bits(mix_bits(base ^ (a * 0xd6e8feb86659fd93ULL)) ^ (b * 0xa5a5a5a5a5a5a5a5ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(base, a, b));
}

}  // namespace tech
