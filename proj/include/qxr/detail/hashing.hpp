#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace qxr::detail {

// splitmix64 finalizer; stable across platforms and process runs.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

/// Order-sensitive hash of a (canonically sorted) id list.
template <typename T>
std::uint64_t hash_ids(std::span<const T> ids) {
  std::uint64_t h = mix64(ids.size());
  for (auto id : ids) h = combine(h, static_cast<std::uint64_t>(id));
  return h;
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

/// Child seed for stream `salt` under `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return combine(mix64(seed), salt);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace qxr::detail
