#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rvt {

// splitmix64; used to whiten derived seeds.
std::uint64_t mix64(std::uint64_t x);

// Child seed for a tagged subtask. Same (root, tag, index) -> same seed,
// distinct tags or indices -> independent streams. Parallel loops seed each
// iteration with derive_seed(root, tag, i) so scheduling cannot reorder draws.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index);

// All stochastic code draws from mt19937_64 seeded via derive_seed.
using Rng = std::mt19937_64;

} // namespace rvt
