#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wplab/geometry.hpp"
#include "wplab/quadrature.hpp"
#include "wplab/weight.hpp"

namespace wplab {

/// Closed-form 1-D kernel: integral of |t|^a over [lo, hi]. Requires a > -1.
double interval_mass(double a, double lo, double hi);

/// w(Q) for an axis-aligned cube. Separable weights (constant, monomial,
/// 1-D power, products of those) use the exact tensor-product of
/// interval_mass values; anything else falls back to the adaptive ball/box
/// quadrature path.
double cube_mass(const WeightSpec& w, const Cube& c,
                 const QuadratureConfig& cfg = {});

/// w(B) = int_B w dx. Exact for constants and origin-centered radial powers;
/// adaptive slice quadrature otherwise; Monte-Carlo when cfg.method says so.
double ball_mass(const WeightSpec& w, const Ball& b,
                 const QuadratureConfig& cfg = {});

/// Monte-Carlo route with its confidence information, kept separate so tests
/// can use it as an independent oracle.
McResult ball_mass_mc(const WeightSpec& w, const Ball& b,
                      std::size_t n_samples, std::uint64_t seed);

double doubling_ratio(const WeightSpec& w, const Ball& b,
                      const QuadratureConfig& cfg = {});
double doubling_ratio_cube(const WeightSpec& w, const Cube& c,
                           const QuadratureConfig& cfg = {});

enum class RegionKind { ball, cube };

struct DoublingSweepConfig {
  RegionKind region = RegionKind::ball;
  double domain_half_width = 10.0;  // centers drawn from [-L, L]^N
  double radius_lo = 0x1p-4;
  double radius_hi = 0x1p2;
  int origin_probes = 10;  // deterministic origin-centered regions per sweep
  int wide_pairs = 8;      // extra samples with radius ratio 4 for the fit
};

struct DoublingSample {
  Vec center;
  double radius = 0.0;
  double mass = 0.0;
  double ratio = 0.0;       // w(2B)/w(B); for wide pairs w(4B)/w(B)
  double radius_factor = 2.0;
};

struct DoublingReport {
  double gamma_hat = 0.0;  // sampled sup of w(2B)/w(B)
  double d_hat = 0.0;      // log2(gamma_hat)
  double d_regression = 0.0;  // least-squares slope of log mass ratio vs log radius ratio
  std::size_t argmax_index = 0;
  std::vector<DoublingSample> samples;
};

/// Sampled doubling sweep: gamma_hat is the sup over sampled regions of the
/// doubling ratio, d_hat = log2(gamma_hat). A least-squares estimate of the
/// dimension is reported alongside as a diagnostic. Deterministic given
/// cfg.seed.
DoublingReport doubling_dimension(const WeightSpec& w,
                                  const DoublingSweepConfig& sweep,
                                  int n_samples,
                                  const QuadratureConfig& cfg = {});

struct ExponentReport {
  double D = 0.0;
  double p = 0.0;
  double chi = 0.0;  // D/(D-p)
  double q = 0.0;    // Dp/(D-p)
};

/// chi and the critical Sobolev exponent q from the weight dimension.
/// Throws "supercritical: exponent undefined" when p >= D.
ExponentReport sobolev_exponents(double D, double p);

struct ApBallRow {
  Ball ball;
  double weight_mass = 0.0;
  double dual_mass = 0.0;
  double constant = 0.0;
  bool violated = false;  // non-integrable side: A_p violated (infinite)
};

struct ApReport {
  double constant = 0.0;  // max over balls; +inf if any ball is violated
  bool violated = false;
  std::vector<ApBallRow> rows;
};

/// Muckenhoupt A_p probe over the given balls:
///   (int_B w)(int_B w^{-1/(p-1)})^{p-1} / lambda(B)^p.
ApReport ap_constant(const WeightSpec& w, double p,
                     const std::vector<Ball>& balls,
                     const QuadratureConfig& cfg = {});

}  // namespace wplab
