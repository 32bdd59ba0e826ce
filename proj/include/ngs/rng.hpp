#pragma once

#include <cstdint>
#include <random>

namespace ngs {

using Rng = std::mt19937_64;

// Distinguishes the independent streams a single trial consumes.
namespace stream_tag {
inline constexpr std::uint64_t generator = 1;
inline constexpr std::uint64_t oracle = 2;
inline constexpr std::uint64_t sample = 3;
inline constexpr std::uint64_t weights = 4;
inline constexpr std::uint64_t adversary = 5;
inline constexpr std::uint64_t target = 6;
inline constexpr std::uint64_t trial = 7;
}  // namespace stream_tag

/// Independent generator for (master seed, index, tag).
inline Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index),  static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag),    static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace ngs
