#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cc {

// Counter-based deterministic random source. The word at position n for
// seed s is SplitMix64 evaluated in random-access form:
//
//   word(s, n) = mix64(s + (n + 1) * 0x9E3779B97F4A7C15)
//
// with mix64 the SplitMix64 finalizer (shift-xor-multiply rounds 30/27/31).
// Every variate consumes exactly one word, so any position can be seeked to
// and replayed. Derived variates (this bit layout is a compatibility
// contract, see README):
//
//   unit(w)        = ((w >> 12) + 0.5) * 2^-52     uniform on (0, 1)
//   angle(w)       = pi * (unit(w) - 1/2)          uniform on (-pi/2, pi/2)
//   exponential(w) = -log(unit(w))                 exponential, mean 1
//
// The 52-bit unit keeps both endpoints exactly representable, so the range
// is [2^-53, 1 - 2^-53]: log and tan stay finite for every word.
class RandomTape {
 public:
  explicit RandomTape(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : seed_(seed), counter_(counter) {}

  static std::uint64_t word_at(std::uint64_t seed,
                               std::uint64_t counter) noexcept {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static double unit_from_word(std::uint64_t w) noexcept {
    return (static_cast<double>(w >> 12) + 0.5) * 0x1.0p-52;
  }

  std::uint64_t next_word() noexcept { return word_at(seed_, counter_++); }

  // Uniform on (0, 1), both endpoints excluded.
  double next_unit() noexcept { return unit_from_word(next_word()); }

  // Uniform on (-pi/2, pi/2), endpoints excluded.
  double next_angle() noexcept {
    return std::numbers::pi * (next_unit() - 0.5);
  }

  // Exponential with mean 1, strictly positive.
  double next_exponential() noexcept { return -std::log(next_unit()); }

  void seek(std::uint64_t counter) noexcept { counter_ = counter; }
  std::uint64_t position() const noexcept { return counter_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace cc
