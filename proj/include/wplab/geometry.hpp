#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace wplab {

using Vec = std::vector<double>;

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// Open Euclidean ball; rho*B keeps the center and scales the radius.
struct Ball {
  Vec center;
  double radius = 1.0;

  int dim() const { return static_cast<int>(center.size()); }
};

inline Ball scaled(const Ball& b, double rho) { return Ball{b.center, b.radius * rho}; }

/// Axis-aligned cube given by center and half-width.
struct Cube {
  Vec center;
  double half_width = 1.0;

  int dim() const { return static_cast<int>(center.size()); }
};

inline Cube scaled(const Cube& c, double rho) { return Cube{c.center, c.half_width * rho}; }

// Smallest admissible region size for mass/doubling operations.
inline constexpr double kMinRadius = 0x1p-20;

inline void require_radius(double r) {
  if (!(r >= kMinRadius))
    throw std::invalid_argument("region radius below minimum 2^-20");
}

// Volume of the unit ball in R^N.
inline double unit_ball_volume(int n) {
  // V_N = pi^{N/2} / Gamma(N/2 + 1)
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

// Surface measure of the unit sphere S^{N-1}.
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace wplab
