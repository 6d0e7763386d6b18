#pragma once

#include <cstdint>

namespace scce {

// Counter-based randomness built on the SplitMix64 finalizer. Every draw is
// a pure function of (seed, key words), so sampling is reproducible bit for
// bit regardless of evaluation order or thread count.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ a);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b) {
  return mix64(keyed(seed, a) ^ b);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b, std::uint64_t c) {
  return mix64(keyed(seed, a, b) ^ c);
}

/// Uniform draw in [0, 1) from 53 random bits.
inline double uniform01(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stream tags keep unrelated uses of the same user seed independent.
namespace stream {
inline constexpr std::uint64_t kEdges = 0x01;
inline constexpr std::uint64_t kPropensity = 0x02;
inline constexpr std::uint64_t kReplication = 0x03;
inline constexpr std::uint64_t kKmeans = 0x04;
inline constexpr std::uint64_t kPairNull = 0x05;
inline constexpr std::uint64_t kOracleNull = 0x06;
inline constexpr std::uint64_t kPower = 0x07;
inline constexpr std::uint64_t kHolm = 0x08;
}  // namespace stream

/// Small sequential generator for consumers that just need a private stream
/// (e.g. k-means restarts). Seeded from a keyed hash, then SplitMix64.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return mix64(state_++); }

  double next_uniform01() { return uniform01(next()); }

  /// Uniform integer in [0, bound) via rejection-free scaling; bound > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    // 128-bit multiply keeps the mapping unbiased enough for simulation use.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace scce
