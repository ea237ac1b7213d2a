#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tumorkit {

using Rng = std::mt19937_64;

// Seed fan-out. Every random stream in the toolkit is seeded with
//   derive_seed(derive_seed(top_seed, "<module>"), "<purpose>"), index...
// so a single top-level seed controls a run and streams never overlap by
// construction order. Strings are hashed with FNV-1a 64, integers are mixed in
// with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t value);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

template <typename First, typename Second, typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, First first, Second second,
                          Rest... rest) {
  return derive_seed(derive_seed(seed, first), second, rest...);
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace tumorkit
