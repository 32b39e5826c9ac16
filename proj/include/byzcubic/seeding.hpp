#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace byzcubic {

/// Mixes a master seed with a list of stream coordinates (worker id, round,
/// salt, ...) into an independent 64-bit seed. Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> parts);

/// Engine seeded from derive_seed(master, parts).
inline std::mt19937_64 make_stream(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> parts) {
  return std::mt19937_64(derive_seed(master, parts));
}

// Stream salts, kept distinct so no two consumers share a random stream.
namespace salt {
inline constexpr std::uint64_t kSplit = 0x5eed0001;
inline constexpr std::uint64_t kShard = 0x5eed0002;
inline constexpr std::uint64_t kGradientNoise = 0x5eed0003;
inline constexpr std::uint64_t kAttackNoise = 0x5eed0004;
inline constexpr std::uint64_t kRandomLabel = 0x5eed0005;
inline constexpr std::uint64_t kGridCell = 0x5eed0006;
inline constexpr std::uint64_t kSynthetic = 0x5eed0007;
}  // namespace salt

}  // namespace byzcubic
