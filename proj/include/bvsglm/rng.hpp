#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bvsglm {

/// Seeded random stream. One stream per chain/replicate; never shared.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derive an independent stream from (master seed, replicate index, role tag).
/// Identical inputs give identical streams.
inline Rng seed_stream(std::uint64_t master, std::uint64_t replicate, std::string_view role) {
  std::uint64_t h = fnv1a64(role);
  h ^= splitmix64(replicate + 0x51ed270b0f3353c7ULL);
  return Rng(splitmix64(master ^ h));
}

}  // namespace bvsglm
