#pragma once

#include <cstdint>
#include <string_view>

namespace redpatrol {

// Stable 64-bit hashing used for content addressing and seed derivation.
// Results must not depend on platform, so std::hash is not used.

constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value));
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::string_view text) {
  return hash_combine(seed, fnv1a(text));
}

}  // namespace redpatrol
