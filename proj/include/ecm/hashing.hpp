#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace ecm {

using uint128 = unsigned __int128;

// SplitMix64 step; used to expand one master seed into per-row parameters.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

// Stable 64-bit pre-hash of an arbitrary byte-string key (FNV-1a followed by
// a SplitMix finalizer). Stable across runs and platforms.
constexpr std::uint64_t key_hash(std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : key) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

// Multiply-add-shift over 64-bit keys with 128-bit parameters
// (Dietzfelbinger): h(x) = ((a*x + b) mod 2^128) >> 64. Pairwise independent
// on the high output bits.
class MultiplyShift {
 public:
  MultiplyShift() = default;
  MultiplyShift(std::uint64_t a_hi, std::uint64_t a_lo, std::uint64_t b_hi,
                std::uint64_t b_lo)
      : a_((static_cast<uint128>(a_hi) << 64) | a_lo | 1),
        b_((static_cast<uint128>(b_hi) << 64) | b_lo) {}

  static MultiplyShift from_seed(std::uint64_t& state) {
    std::uint64_t a_hi = splitmix64(state);
    std::uint64_t a_lo = splitmix64(state);
    std::uint64_t b_hi = splitmix64(state);
    std::uint64_t b_lo = splitmix64(state);
    return {a_hi, a_lo, b_hi, b_lo};
  }

  std::uint64_t operator()(std::uint64_t x) const {
    return static_cast<std::uint64_t>((a_ * x + b_) >> 64);
  }

  // Maps x uniformly onto [0, width) using the top 32 output bits.
  std::uint32_t bucket(std::uint64_t x, std::uint32_t width) const {
    std::uint64_t top = (*this)(x) >> 32;
    return static_cast<std::uint32_t>((top * width) >> 32);
  }

  friend bool operator==(const MultiplyShift&, const MultiplyShift&) = default;

 private:
  uint128 a_ = 1;
  uint128 b_ = 0;
};

}  // namespace ecm
