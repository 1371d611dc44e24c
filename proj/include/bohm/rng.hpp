#pragma once

// Counter-based random streams: every draw is a pure function of
// (seed, stream, index), so results do not depend on scheduling.

#include <cstdint>
#include <random>

namespace bohm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for draw `index` of stream `stream`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL)) ^ index);
}

/// Uniform in the open interval (0, 1).
inline double open_uniform(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Independent engine for (seed, stream, index).
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return std::mt19937_64(stream_seed(seed, stream, index));
}

// Stream ids used across the project.
inline constexpr std::uint64_t kStreamInverseCdf = 1;
inline constexpr std::uint64_t kStreamRejection = 2;
inline constexpr std::uint64_t kStreamMetropolis = 3;
inline constexpr std::uint64_t kStreamReference = 4;

}  // namespace bohm
