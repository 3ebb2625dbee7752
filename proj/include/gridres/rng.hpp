#pragma once

#include <cmath>
#include <cstdint>

namespace gridres {

// xorshift64* (Vigna). State update
//   x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;
// output x * 0x2545F4914F6CDD1D. A zero seed is remapped since zero is a
// fixed point of the shift register.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed)
      : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  // Standard normal via Box-Muller (one draw per call, no caching).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace gridres
