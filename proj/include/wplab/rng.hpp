#pragma once

#include <cstdint>
#include <random>

namespace wplab {

/// Seeded generator with a platform-independent uniform double in [0,1).
/// std::uniform_real_distribution is implementation-defined, so draws are
/// built directly from the raw 64-bit stream to keep outputs reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // log-uniform over [lo, hi], lo > 0
  double log_uniform(double lo, double hi);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

inline double Rng::log_uniform(double lo, double hi) {
  double a = std::log(lo), b = std::log(hi);
  return std::exp(uniform(a, b));
}

}  // namespace wplab
