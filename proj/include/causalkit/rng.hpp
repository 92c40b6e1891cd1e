#pragma once

// Deterministic random streams. Everything random in the toolkit derives
// from a 64-bit seed through the functions below, so results are
// bit-identical across platforms and across serial/parallel execution.
//
//   splitmix64 : Steele, Lea & Flood (2014) SplitMix64 generator.
//   xoshiro256** : Blackman & Vigna (2018), state expanded from a 64-bit
//                  seed with four successive SplitMix64 outputs.
//   mix(master, i) = splitmix64_finalize(master ^ splitmix64_finalize(i))
//                  where splitmix64_finalize(x) is one SplitMix64 output for
//                  state x (i.e. the finalizer applied to x + 0x9e3779b97f4a7c15).
//
// Uniform doubles take the top 53 bits: (x >> 11) * 2^-53, so u in [0, 1).
// Bounded integers use Lemire's multiply-high: floor(x * n / 2^64).

#include <array>
#include <cstdint>

namespace causalkit {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64_finalize(std::uint64_t x) {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `i` of a master seed (rows of a sample, bootstrap
/// replicates).
constexpr std::uint64_t mix(std::uint64_t master, std::uint64_t i) {
  return splitmix64_finalize(master ^ splitmix64_finalize(i));
}

constexpr double to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t out = splitmix64_finalize(state_);
    state_ += kGoldenGamma;
    return out;
  }

  constexpr double uniform() { return to_unit_double(next()); }

 private:
  std::uint64_t state_;
};

class Xoshiro256ss {
 public:
  explicit constexpr Xoshiro256ss(std::uint64_t seed) : s_{} {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  /// Generator with the given raw state (must not be all zero).
  static constexpr Xoshiro256ss from_state(const std::array<std::uint64_t, 4>& state) {
    Xoshiro256ss g(0);
    g.s_ = state;
    return g;
  }

  constexpr std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  constexpr double uniform() { return to_unit_double(next()); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
};

}  // namespace causalkit
