#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wplab/geometry.hpp"

namespace wplab {

/// Sampled radial function (r_i, u_i, u'_i), r strictly increasing.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  double p = 2.0;
  double q = 0.0;
  double D = 0.0;       // effective dimension N + weight degree
  double a_eff = 0.0;   // weight exponent of the radial model

  /// Piecewise-linear evaluation; clamps outside the sample range.
  double interp(double rr) const;
  double interp_du(double rr) const;
  /// Piecewise cubic Hermite through (u, du); clamps outside the range.
  double interp_cubic(double rr) const;
};

struct BubbleParams {
  double a_scale = 1.0;
  double p = 2.0;
  double D = 3.0;
};

/// Radial extremal profile (a^{1/(p-1)} / (a^{p/(p-1)} + r^{p/(p-1)}))^{(D-p)/p}
/// with unit multiplicative normalization. Strictly decreasing in r.
double bubble_value(const BubbleParams& bp, double r);

/// Analytic first derivative of the profile.
double bubble_derivative(const BubbleParams& bp, double r);

RadialProfile sample_bubble(const BubbleParams& bp, double r_max, int n_samples);

/// Radial operator L[u](r) = -(p-1)|u'|^{p-2}u'' - (D-1)/r |u'|^{p-2}u'
/// applied through centered second-order finite differences at step h.
double radial_operator_fd(double p, double D,
                          const std::function<double(double)>& u, double r,
                          double h);

struct BubbleResidual {
  double c_hat = 0.0;        // mean of c(r) = L[U](r) / U(r)^{q-1}
  double max_rel_dev = 0.0;  // max |c(r) - c_hat| / |c_hat|
  int excluded = 0;          // samples too close to r = 0 for the stencil
};

/// Checks that the bubble solves the critical radial equation up to one
/// multiplicative constant: c(r) should be flat across the samples.
BubbleResidual bubble_residual(double p, double D, double a_scale,
                               std::span<const double> r_samples,
                               double fd_step = 1e-4);

/// C2 = s|s|^{p-2} (D - (p-2)(s+1) - 2 - s); positive iff 0 < s < (D-p)/(p-1).
double supersolution_constant(double p, double D, double s);

/// Max relative deviation of the finite-difference radial operator on r^{-s}
/// from C2 r^{-s-2-(p-2)(s+1)}.
double supersolution_residual(double p, double D, double s,
                              std::span<const double> r_samples,
                              double fd_step = 1e-4);

struct ShootingConfig {
  double alpha0 = 1.0;   // u(0)
  double r_max = 50.0;
  double dt0 = 1e-4;     // initial step
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double eps = 0.0;      // flux regularization for p < 2
  std::size_t max_steps = 2'000'000;
};

enum class ShootClass { decaying, sign_change, grows };

struct ShootResult {
  RadialProfile profile;
  ShootClass classification = ShootClass::decaying;
  std::optional<double> r_star;  // first sign change when present
  std::size_t steps = 0;
};

/// Raised on step underflow; carries the partial profile.
class StiffFailure : public std::runtime_error {
 public:
  explicit StiffFailure(RadialProfile partial)
      : std::runtime_error("stiff failure: step underflow"),
        partial(std::move(partial)) {}
  RadialProfile partial;
};

/// Integrates -(r^{D-1}|u'|^{p-2}u')' = r^{D-1}|u|^{q-2}u from r = 0 with
/// u(0) = alpha0, u'(0) = 0. Series launch near the origin, embedded 4(5)
/// pair with PI step control, flux-variable formulation.
ShootResult shoot(double p, double D, double q, const ShootingConfig& cfg);

struct DecayFit {
  double exponent = 0.0;  // negated log-log slope
  double r2 = 0.0;
  double slope_std_error = 0.0;
  std::size_t n_used = 0;
};

/// Least-squares fit of log|u| against log r inside [window_lo, window_hi].
/// Throws "insufficient tail data" with fewer than 5 usable samples.
DecayFit decay_fit(std::span<const double> r, std::span<const double> u_abs,
                   double window_lo, double window_hi);

struct DecayStep {
  double t = 0.0;
  double sigma = 0.0;
};

struct DecaySchedule {
  std::vector<DecayStep> steps;
  double final_t = 0.0;
  bool reached_target = false;
};

/// Bootstrap schedule for the improved decay exponent: at each step the
/// largest admissible sigma (with a 0.9 safety factor) satisfying
/// t+2+sigma+(p-2)(t+sigma+1) < t(q-1) while keeping t+sigma < (D-p)/(p-1).
DecaySchedule improved_decay_schedule(double p, double D, double t0,
                                      double target_gap = 1e-3,
                                      int max_steps = 500);

}  // namespace wplab
