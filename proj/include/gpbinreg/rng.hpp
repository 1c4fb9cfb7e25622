#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gpbr {

using RngEngine = std::mt19937_64;

/// splitmix64 output function; full-period 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from (root, label, index). Used to hand each
/// campaign/replicate its own reproducible, statistically independent stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = root ^ 0x51f15ee5u;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;  // FNV-1a step
  }
  h ^= index + 0x9e3779b97f4a7c15ULL;
  std::uint64_t s = h;
  splitmix64(s);
  return splitmix64(s);
}

inline RngEngine make_stream(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
  return RngEngine(derive_seed(root, label, index));
}

}  // namespace gpbr
