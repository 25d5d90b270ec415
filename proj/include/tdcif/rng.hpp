#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tdcif {

using Rng = std::mt19937_64;

/// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for a named sub-procedure, so every consumer of
/// randomness can be reproduced on its own from the single user seed.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view name);
std::uint64_t stream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::string_view name) {
  return Rng(stream_seed(seed, name));
}

inline Rng make_rng(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  return Rng(stream_seed(seed, name, index));
}

}  // namespace tdcif
