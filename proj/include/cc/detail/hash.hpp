#pragma once

#include <cstdint>
#include <string_view>

namespace cc::detail {

// SplitMix64 finalizer; bijective avalanche mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// FNV-1a over a byte stream, finalized with mix64. Used to derive
// per-repetition tape seeds from experiment coordinates.
class Fnv1a {
 public:
  Fnv1a& u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Fnv1a& u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Fnv1a& str(std::string_view s) {
    for (char c : s) byte(static_cast<std::uint8_t>(c));
    return *this;
  }
  std::uint64_t digest() const { return mix64(h_); }

 private:
  void byte(std::uint8_t b) { h_ = (h_ ^ b) * 1099511628211ull; }
  std::uint64_t h_ = 14695981039346656037ull;
};

inline std::uint64_t rep_seed(std::uint64_t master_seed,
                              std::string_view vector_id,
                              std::uint32_t alpha_index,
                              std::uint32_t k_index, std::uint32_t rep) {
  return Fnv1a{}
      .u64(master_seed)
      .str(vector_id)
      .u32(alpha_index)
      .u32(k_index)
      .u32(rep)
      .digest();
}

// Seed for the symmetric sketch paired with a skewed one in the same
// repetition; decorrelated but reproducible.
inline std::uint64_t paired_symmetric_seed(std::uint64_t seed) {
  return mix64(seed ^ 0x53594D5345454431ull);
}

}  // namespace cc::detail
