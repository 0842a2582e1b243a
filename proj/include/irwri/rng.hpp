#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "irwri/types.hpp"

namespace irwri {

// mt19937_64 with hand-rolled uniform and Box-Muller transforms. The
// standard distributions are implementation-defined, so outputs would not
// be reproducible across standard libraries; every stage of this generator
// is pinned by the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Circularly symmetric complex Gaussian with unit variance E|z|^2 = 1.
  Complex complex_normal() {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    const double re = normal();
    const double im = normal();
    return {re * inv_sqrt2, im * inv_sqrt2};
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace irwri
