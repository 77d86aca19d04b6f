#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace rcon {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic child seed for a stream identified by `tags`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

/// Child seed for a chain over the given vertex set. Identical vertex sets
/// get identical streams, so a local model that equals the full model
/// reproduces the global chain.
inline std::uint64_t derive_seed(std::uint64_t seed, std::span<const int> vertices) {
  std::uint64_t h = splitmix64(seed ^ 0x5bd1e9955bd1e995ULL);
  h = splitmix64(h ^ vertices.size());
  for (int v : vertices) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

}  // namespace rcon
