#pragma once

#include <cstdint>

namespace erblock {

/// MurmurHash3 64-bit finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

/// Seeded hash of a token id. For a fixed seed this is a bijection of the
/// 64-bit space, i.e. a pseudo-random permutation of token ids.
constexpr std::uint64_t seeded_hash(std::uint64_t seed, std::uint64_t x) noexcept {
  const std::uint64_t s = mix64(seed + 0x9E3779B97F4A7C15ULL);
  return mix64(mix64(x ^ s) + (s | 1));
}

/// Independent sub-seed number `stream` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream + 0xD1B54A32D192ED03ULL));
}

/// Uniform double in [0, 1) from the top 53 bits of a hash.
constexpr double to_unit(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace erblock
