#include "l0relax/rng.hpp"

namespace l0relax {

namespace {

// FNV-1a; only needs to be stable, not strong.
std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Rng substream(std::uint64_t root, std::string_view label, std::uint64_t index) {
  const std::uint64_t h = hash_label(label);
  std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace l0relax
