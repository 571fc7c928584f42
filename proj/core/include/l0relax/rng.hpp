#pragma once

// Seeded random streams. Every consumer derives its own generator from a root
// seed, a label and an index, so results never depend on call order or on how
// work is split across threads.

#include <cstdint>
#include <random>
#include <string_view>

namespace l0relax {

using Rng = std::mt19937_64;

/// Generator for stream (label, index) under `root`.
[[nodiscard]] Rng substream(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

}  // namespace l0relax
