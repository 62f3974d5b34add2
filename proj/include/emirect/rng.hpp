#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace emirect {

/// Deterministic generator used everywhere randomness is needed. Gaussian
/// sampling is hand-rolled (Box-Muller) so traces are reproducible across
/// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    // 53-bit mantissa in (0,1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
  }

  double gaussian(double mean = 0.0, double stddev = 1.0) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

} // namespace emirect
