#include "wplab/radial_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wplab {

namespace {

double interp_on(const std::vector<double>& xs, const std::vector<double>& ys,
                 double x) {
  if (xs.empty()) return 0.0;
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

}  // namespace

double RadialProfile::interp(double rr) const { return interp_on(r, u, rr); }
double RadialProfile::interp_du(double rr) const { return interp_on(r, du, rr); }

double RadialProfile::interp_cubic(double rr) const {
  if (r.empty()) return 0.0;
  if (rr <= r.front()) return u.front();
  if (rr >= r.back()) return u.back();
  auto it = std::upper_bound(r.begin(), r.end(), rr);
  std::size_t i = static_cast<std::size_t>(it - r.begin());
  double h = r[i] - r[i - 1];
  double t = (rr - r[i - 1]) / h;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * u[i - 1] + h10 * h * du[i - 1] + h01 * u[i] + h11 * h * du[i];
}

double bubble_value(const BubbleParams& bp, double r) {
  const double pp = bp.p / (bp.p - 1.0);
  const double num = std::pow(bp.a_scale, 1.0 / (bp.p - 1.0));
  const double den = std::pow(bp.a_scale, pp) + std::pow(r, pp);
  return std::pow(num / den, (bp.D - bp.p) / bp.p);
}

double bubble_derivative(const BubbleParams& bp, double r) {
  if (r == 0.0) return 0.0;
  const double pp = bp.p / (bp.p - 1.0);
  const double den = std::pow(bp.a_scale, pp) + std::pow(r, pp);
  // d/dr log U = -((D-p)/p) * pp * r^{pp-1} / den
  return bubble_value(bp, r) * (-(bp.D - bp.p) / bp.p) * pp *
         std::pow(r, pp - 1.0) / den;
}

RadialProfile sample_bubble(const BubbleParams& bp, double r_max, int n_samples) {
  RadialProfile prof;
  prof.p = bp.p;
  prof.D = bp.D;
  prof.q = bp.D * bp.p / (bp.D - bp.p);
  prof.a_eff = bp.D - 1.0;
  prof.r.resize(n_samples);
  prof.u.resize(n_samples);
  prof.du.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    double r = r_max * static_cast<double>(i) / (n_samples - 1);
    prof.r[i] = r;
    prof.u[i] = bubble_value(bp, r);
    prof.du[i] = bubble_derivative(bp, r);
  }
  return prof;
}

double radial_operator_fd(double p, double D,
                          const std::function<double(double)>& u, double r,
                          double h) {
  const double um = u(r - h), u0 = u(r), up = u(r + h);
  const double d1 = (up - um) / (2.0 * h);
  const double d2 = (up - 2.0 * u0 + um) / (h * h);
  const double grad_pow = std::pow(std::abs(d1), p - 2.0);
  return -((p - 1.0) * grad_pow * d2 + (D - 1.0) / r * grad_pow * d1);
}

BubbleResidual bubble_residual(double p, double D, double a_scale,
                               std::span<const double> r_samples,
                               double fd_step) {
  if (!(p > 1.0) || !(D > p)) throw std::invalid_argument("need 1 < p < D");
  const double q = D * p / (D - p);
  BubbleParams bp{a_scale, p, D};
  auto u = [&](double r) { return bubble_value(bp, r); };
  std::vector<double> c;
  BubbleResidual out;
  for (double r : r_samples) {
    // step scales with r so cancellation in the operator stays benign
    double h = fd_step * std::max(1.0, r);
    if (r - 2.0 * h <= 0.0) {
      ++out.excluded;
      continue;
    }
    double L = radial_operator_fd(p, D, u, r, h);
    double cr = L / std::pow(u(r), q - 1.0);
    if (!std::isfinite(cr)) {
      ++out.excluded;
      continue;
    }
    c.push_back(cr);
  }
  if (c.empty()) throw std::runtime_error("no usable samples for residual");
  out.c_hat = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
  for (double cr : c)
    out.max_rel_dev = std::max(out.max_rel_dev,
                               std::abs(cr - out.c_hat) / std::abs(out.c_hat));
  return out;
}

double supersolution_constant(double p, double D, double s) {
  if (s == 0.0) throw std::invalid_argument("s must be nonzero");
  return s * std::pow(std::abs(s), p - 2.0) *
         (D - (p - 2.0) * (s + 1.0) - 2.0 - s);
}

double supersolution_residual(double p, double D, double s,
                              std::span<const double> r_samples,
                              double fd_step) {
  const double c2 = supersolution_constant(p, D, s);
  const double expo = -s - 2.0 - (p - 2.0) * (s + 1.0);
  auto u = [&](double r) { return std::pow(r, -s); };
  double worst = 0.0;
  for (double r : r_samples) {
    double h = fd_step * std::max(1.0, r);
    if (r - 2.0 * h <= 0.0) continue;
    double L = radial_operator_fd(p, D, u, r, h);
    double exact = c2 * std::pow(r, expo);
    double scale = (c2 != 0.0 ? std::abs(c2) : 1.0) * std::pow(r, expo);
    worst = std::max(worst, std::abs(L - exact) / scale);
  }
  return worst;
}

namespace {

// phi(s) = |s|^{p-2} s and its regularized inverse. With eps > 0 (p < 2 only)
// phi is replaced by phi_eps(s) = (s^2 + eps^2)^{(p-2)/2} s and inverted by
// safeguarded Newton.
double invert_flux(double g, double p, double eps) {
  if (g == 0.0) return 0.0;
  double s = std::copysign(std::pow(std::abs(g), 1.0 / (p - 1.0)), g);
  if (eps <= 0.0 || p >= 2.0) return s;
  for (int it = 0; it < 50; ++it) {
    double s2 = s * s + eps * eps;
    double f = std::pow(s2, 0.5 * (p - 2.0)) * s - g;
    double df = std::pow(s2, 0.5 * (p - 2.0)) *
                (1.0 + (p - 2.0) * s * s / s2);
    double step = f / df;
    s -= step;
    if (std::abs(step) <= 1e-15 * (std::abs(s) + 1e-300)) break;
  }
  return s;
}

struct OdeState {
  double u;
  double flux;  // r^{D-1} |u'|^{p-2} u'
};

struct Derivs {
  double du;
  double dflux;
};

Derivs rhs(double r, const OdeState& y, double p, double D, double q, double eps) {
  Derivs d;
  double g = y.flux / std::pow(r, D - 1.0);
  d.du = invert_flux(g, p, eps);
  d.dflux = -std::pow(r, D - 1.0) * std::pow(std::abs(y.u), q - 2.0) * y.u;
  return d;
}

}  // namespace

ShootResult shoot(double p, double D, double q, const ShootingConfig& cfg) {
  if (!(p > 1.0) || !(D > p)) throw std::invalid_argument("need 1 < p < D");
  if (!(cfg.alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (!(cfg.r_max > 0.0)) throw std::invalid_argument("r_max must be positive");

  ShootResult res;
  RadialProfile& prof = res.profile;
  prof.p = p;
  prof.q = q;
  prof.D = D;
  prof.a_eff = D - 1.0;

  // series launch: u ~ alpha - c0 r^{p/(p-1)}, flux ~ -(alpha^{q-1}/D) r^D
  const double alpha = cfg.alpha0;
  const double r0 = std::min(1e-3, 1e-4 * cfg.r_max);
  const double k0 = std::pow(alpha, q - 1.0) / D;
  const double c0 = (p - 1.0) / p * std::pow(k0, 1.0 / (p - 1.0));

  prof.r.push_back(0.0);
  prof.u.push_back(alpha);
  prof.du.push_back(0.0);

  OdeState y;
  y.u = alpha - c0 * std::pow(r0, p / (p - 1.0));
  y.flux = -k0 * std::pow(r0, D);
  double r = r0;

  prof.r.push_back(r);
  prof.u.push_back(y.u);
  prof.du.push_back(invert_flux(y.flux / std::pow(r, D - 1.0), p, cfg.eps));

  // Dormand-Prince 5(4) coefficients
  static const double A[7][6] = {
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static const double B5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192,
                               -2187.0 / 6784, 11.0 / 84, 0};
  static const double B4[7] = {5179.0 / 57600,   0,           7571.0 / 16695,
                               393.0 / 640,      -92097.0 / 339200,
                               187.0 / 2100,     1.0 / 40};

  double h = std::max(cfg.dt0, 1e-8);
  double err_prev = 1.0;
  bool rising = false;

  auto record = [&](double rr, const OdeState& s) {
    prof.r.push_back(rr);
    prof.u.push_back(s.u);
    prof.du.push_back(invert_flux(s.flux / std::pow(rr, D - 1.0), p, cfg.eps));
  };

  const double h_cap = cfg.r_max / 100.0;  // keeps profiles dense for interpolation
  while (r < cfg.r_max) {
    if (++res.steps > cfg.max_steps) throw StiffFailure(std::move(prof));
    h = std::min({h, cfg.r_max - r, h_cap});
    Derivs k[7];
    OdeState stage;
    k[0] = rhs(r, y, p, D, q, cfg.eps);
    for (int i = 1; i < 7; ++i) {
      stage = y;
      for (int j = 0; j < i; ++j) {
        stage.u += h * A[i][j] * k[j].du;
        stage.flux += h * A[i][j] * k[j].dflux;
      }
      k[i] = rhs(r + C[i] * h, stage, p, D, q, cfg.eps);
    }
    OdeState y5 = y, y4 = y;
    for (int i = 0; i < 7; ++i) {
      y5.u += h * B5[i] * k[i].du;
      y5.flux += h * B5[i] * k[i].dflux;
      y4.u += h * B4[i] * k[i].du;
      y4.flux += h * B4[i] * k[i].dflux;
    }
    double sc_u = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y.u), std::abs(y5.u));
    double sc_f = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y.flux), std::abs(y5.flux));
    double eu = (y5.u - y4.u) / sc_u;
    double ef = (y5.flux - y4.flux) / sc_f;
    double err = std::sqrt(0.5 * (eu * eu + ef * ef));
    if (err <= 1.0) {
      double r_new = r + h;
      if (y5.u <= 0.0 && y.u > 0.0) {
        // locate first sign change by bisection on dense cubic interpolation
        double lo = 0.0, hi = 1.0;
        double du_lo = k[0].du, du_hi = k[6].du;
        auto hermite = [&](double t) {
          double t2 = t * t, t3 = t2 * t;
          double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
          double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
          return h00 * y.u + h10 * h * du_lo + h01 * y5.u + h11 * h * du_hi;
        };
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          (hermite(mid) > 0.0 ? lo : hi) = mid;
        }
        double t_star = 0.5 * (lo + hi);
        res.classification = ShootClass::sign_change;
        res.r_star = r + t_star * h;
        record(r_new, y5);
        return res;
      }
      y = y5;
      r = r_new;
      record(r, y);
      if (!rising && prof.u.size() >= 2 && y.u > 0.0) {
        double du_now = prof.du.back();
        if (du_now > 0.0) rising = true;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2) *
                   std::pow(err_prev, 0.04);
      h *= std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-10);
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
    if (h < 1e-14 * std::max(1.0, r)) throw StiffFailure(std::move(prof));
  }
  res.classification = rising ? ShootClass::grows : ShootClass::decaying;
  if (!rising && prof.du.back() > 0.0) res.classification = ShootClass::grows;
  return res;
}

DecayFit decay_fit(std::span<const double> r, std::span<const double> u_abs,
                   double window_lo, double window_hi) {
  if (r.size() != u_abs.size()) throw std::invalid_argument("size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < window_lo || r[i] > window_hi) continue;
    if (!(u_abs[i] > 0.0)) continue;
    x.push_back(std::log(r[i]));
    y.push_back(std::log(u_abs[i]));
  }
  if (x.size() < 5) throw std::runtime_error("insufficient tail data");
  const std::size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit fit;
  double slope = sxy / sxx;
  fit.exponent = -slope;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.n_used = n;
  if (n > 2) {
    double ss_res = std::max(0.0, syy - slope * sxy);
    fit.slope_std_error = std::sqrt(ss_res / (n - 2) / sxx);
  }
  return fit;
}

DecaySchedule improved_decay_schedule(double p, double D, double t0,
                                      double target_gap, int max_steps) {
  if (!(p > 1.0) || !(D > p)) throw std::invalid_argument("need 1 < p < D");
  const double q = D * p / (D - p);
  const double s_max = (D - p) / (p - 1.0);
  if (!(t0 > 0.0) || !(t0 < s_max))
    throw std::domain_error("initial exponent out of range");
  DecaySchedule sched;
  double t = t0;
  for (int n = 0; n < max_steps; ++n) {
    if (s_max - t < target_gap) {
      sched.reached_target = true;
      break;
    }
    // t+2+sigma+(p-2)(t+sigma+1) < t(q-1)  <=>  sigma < (t(q-1)-t-2-(p-2)(t+1))/(p-1)
    double bound_ineq = (t * (q - 1.0) - t - 2.0 - (p - 2.0) * (t + 1.0)) / (p - 1.0);
    double bound_range = s_max - t;
    double sigma = 0.9 * std::min(bound_ineq, bound_range);
    if (!(sigma > 0.0)) break;  // no admissible sigma remains
    sched.steps.push_back({t, sigma});
    t += sigma;
  }
  sched.final_t = t;
  if (s_max - t < target_gap) sched.reached_target = true;
  return sched;
}

}  // namespace wplab
