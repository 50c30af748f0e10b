#pragma once

#include <cstdint>
#include <random>

namespace saomre {

using Engine = std::mt19937_64;

// Stream tags keep the phases from sharing random numbers.
enum class Stream : std::uint64_t {
  Simulate = 0,
  Phase1 = 1,
  Phase2 = 2,
  Phase3 = 3,
  Data = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: the engine for replicate `index` of `stream` depends only on
/// (master, stream, index), so results do not depend on which worker runs it.
inline Engine make_stream(std::uint64_t master, Stream stream, std::uint64_t index) {
  const std::uint64_t key =
      splitmix64(splitmix64(master ^ (static_cast<std::uint64_t>(stream) << 56)) ^ index);
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return Engine(seq);
}

}  // namespace saomre
