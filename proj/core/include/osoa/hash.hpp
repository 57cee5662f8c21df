#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace osoa {

inline constexpr std::uint64_t kFnvOffset64 = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime64 = 0x100000001b3ull;
inline constexpr std::uint32_t kFnvOffset32 = 0x811c9dc5u;
inline constexpr std::uint32_t kFnvPrime32 = 0x01000193u;

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t h = kFnvOffset64) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime64;
  }
  return h;
}

inline std::uint32_t fnv1a32(std::span<const std::uint8_t> bytes,
                             std::uint32_t h = kFnvOffset32) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime32;
  }
  return h;
}

/// Fixed 64-bit mixing generator used for the bits-back initial-bits
/// reservoir and the synthetic bench sources. The constants are part of
/// the container format contract: a decoder must reproduce the exact
/// word sequence for a given seed.
class Splitmix64 {
 public:
  explicit Splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next()); }

  /// Uniform double in [0, 1) from the top 53 bits; identical on every
  /// platform, unlike std::uniform_real_distribution.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace osoa
