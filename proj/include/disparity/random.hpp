#pragma once

#include <cstdint>
#include <random>

namespace disparity {

/// Stream purposes, mixed into the seed so streams for the same replication differ.
enum class StreamTag : std::uint32_t {
  generate = 1,
  cda = 2,
  bootstrap = 3,
};

/// Independent engine for (master seed, index, tag, attempt).
///
/// Counter-based splitting: the engine depends only on these values, so any
/// replication can be reproduced in isolation and in any order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, StreamTag tag,
                                   std::uint64_t attempt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(attempt),
                    static_cast<std::uint32_t>(attempt >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace disparity
