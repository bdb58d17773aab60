#ifndef OPLEARN_RNG_HPP
#define OPLEARN_RNG_HPP

#include <cmath>
#include <cstdint>

// Frozen deterministic random number generation.
//
// Every random quantity in this project (noise realizations, crop positions,
// parameter initializations, derived per-sample seeds) comes from the
// generators below. The algorithms are fixed and must not change, so that a
// given (input, seed) pair produces bit-identical results on every run:
//
//   * state seeding:    splitmix64 (Steele, Lea, Flood; the 64-bit finalizer
//                       with increment 0x9E3779B97F4A7C15)
//   * uniform stream:   xoshiro256** 1.0 (Blackman, Vigna)
//   * uniform doubles:  53-bit mantissa, (next() >> 11) * 2^-53
//   * gaussians:        Box-Muller on (0,1] x [0,1), second value cached
//   * bounded integers: 128-bit multiply-shift, (next() * n) >> 64
//   * derived seeds:    mix64(base + 0x9E3779B97F4A7C15 * (salt + 1))

namespace oplearn {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    return mix64(state);
  }
};

// Deterministic sub-stream seeds. Distinct salts give statistically
// independent streams from the same master seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return mix64(base + 0x9E3779B97F4A7C15ULL * (salt + 1));
}

class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& w : s_) w = sm.next();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero is absorbing
  }

  std::uint64_t next() {
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

  // Uniform on [0,1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform_open01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace oplearn

#endif  // OPLEARN_RNG_HPP
