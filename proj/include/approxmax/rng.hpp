#pragma once

// Deterministic random streams for the experiment harness. std::mt19937 and
// std::uniform_real_distribution leave implementations latitude the
// reproducibility contract cannot afford, so the generator (xoshiro256++) and
// the uniform mapping are spelled out here and produce identical sequences on
// every platform.

#include <array>
#include <cstdint>

#include "approxmax/errors.hpp"

namespace approxmax {

// SplitMix64 step; used only to expand seeds into generator state.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Xoshiro256pp {
 public:
  // Distinct (seed, stream) pairs yield decorrelated sequences; equal pairs
  // yield identical sequences.
  explicit Xoshiro256pp(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t st = seed;
    st ^= (stream + 1) * 0xD2B74407B1CE6E93ULL;
    for (auto& word : s_) word = splitmix64_next(st);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform draw from the open interval (lo, hi). 53-bit mantissa mapping;
  // boundary hits are rejected and redrawn.
  double uniform_open(double lo, double hi) {
    if (!(lo < hi)) throw config_error("uniform_open requires lo < hi");
    for (;;) {
      const double u = double(next() >> 11) * 0x1.0p-53;
      const double v = lo + u * (hi - lo);
      if (v > lo && v < hi) return v;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

// Stream used for trial t of an experiment with the given master seed.
inline Xoshiro256pp make_trial_rng(std::uint64_t master_seed,
                                   std::uint64_t trial) {
  return Xoshiro256pp(master_seed, trial);
}

}  // namespace approxmax
