#pragma once

#include <cstdint>
#include <random>

namespace mbo {

// splitmix64: cheap, well-mixed stream splitter for seeding.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// All randomness flows from one root seed through named streams.
// Stream ids used by the harness (documented order):
//   0 voronoi seeds, 1 oracle instances, 2 blob initial data,
//   3 property-test vectors, 4 stripe sweep.
namespace streams {
inline constexpr std::uint64_t kVoronoi = 0;
inline constexpr std::uint64_t kOracle = 1;
inline constexpr std::uint64_t kBlobs = 2;
inline constexpr std::uint64_t kProperty = 3;
inline constexpr std::uint64_t kStripes = 4;
}  // namespace streams

inline std::mt19937_64 make_stream(std::uint64_t root_seed, std::uint64_t stream_id) {
  std::uint64_t s = root_seed ^ (0xD1B54A32D192ED03ull * (stream_id + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace mbo
