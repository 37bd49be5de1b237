#pragma once

// Test-only oracles, independent of the library's quadrature path.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wplab/geometry.hpp"
#include "wplab/quadrature.hpp"
#include "wplab/weight.hpp"

namespace wplab {

// deterministic test RNG (same raw-bits construction as the library's)
class test_rng {
 public:
  explicit test_rng(std::uint64_t seed) : eng_(seed) {}
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

 private:
  std::mt19937_64 eng_;
};

// plain-sum Monte Carlo over a cube, kept independent of the library MC path
inline McResult mc_cube_oracle(const WeightSpec& w, const Cube& c,
                               std::size_t n, std::uint64_t seed) {
  test_rng rng(seed);
  int dim = c.dim();
  double vol = std::pow(2.0 * c.half_width, dim);
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d)
      x[d] = c.center[d] + (2.0 * rng.u01() - 1.0) * c.half_width;
    double v = w.eval(x);
    sum += v;
    sum_sq += v * v;
  }
  McResult out;
  out.samples = n;
  double mean = sum / n;
  out.value = mean * vol;
  out.std_error = vol * std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
  return out;
}

// Monte Carlo average of fn over an N-dimensional ball (indicator method),
// returning (fint_B fn w) estimate with w = 1.
template <class Fn>
McResult mc_ball_average_oracle(Fn&& fn, const Vec& center, double radius,
                                int dim, std::size_t n, std::uint64_t seed) {
  test_rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t inside = 0;
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      double t = (2.0 * rng.u01() - 1.0) * radius;
      x[d] = center[d] + t;
      r2 += t * t;
    }
    if (r2 >= radius * radius) continue;
    ++inside;
    double v = fn(x);
    sum += v;
    sum_sq += v * v;
  }
  McResult out;
  out.samples = inside;
  double mean = inside ? sum / inside : 0.0;
  out.value = mean;
  out.std_error = inside ? std::sqrt(std::max(0.0, sum_sq / inside - mean * mean) /
                                     inside)
                         : 0.0;
  return out;
}

}  // namespace wplab
