#include "wplab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wplab/weight_calculus.hpp"

namespace wplab {

namespace {

constexpr double kClipFloor = 1e-30;

struct ProbeStats {
  double max_abs = 0.0;
  double min_abs = std::numeric_limits<double>::infinity();
};

ProbeStats probe_radial(const RadialFn& u, double radius) {
  ProbeStats st;
  const int n = 2048;
  for (int i = 0; i <= n; ++i) {
    double v = std::abs(u(radius * i / n));
    st.max_abs = std::max(st.max_abs, v);
    st.min_abs = std::min(st.min_abs, v);
  }
  return st;
}

ProbeStats probe_ball(const PointFn& u, const Ball& b) {
  ProbeStats st;
  const int n = b.dim() == 1 ? 4096 : 64;
  std::array<double, 4> x{};
  if (b.dim() == 1) {
    for (int i = 0; i <= n; ++i) {
      x[0] = b.center[0] + b.radius * (2.0 * i / n - 1.0);
      double v = std::abs(u(std::span<const double>(x.data(), 1)));
      st.max_abs = std::max(st.max_abs, v);
      st.min_abs = std::min(st.min_abs, v);
    }
    return st;
  }
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      double tx = 2.0 * i / n - 1.0, ty = 2.0 * j / n - 1.0;
      if (tx * tx + ty * ty >= 1.0) continue;
      x[0] = b.center[0] + b.radius * tx;
      x[1] = b.center[1] + b.radius * ty;
      double v = std::abs(u(std::span<const double>(x.data(), 2)));
      st.max_abs = std::max(st.max_abs, v);
      st.min_abs = std::min(st.min_abs, v);
    }
  return st;
}

}  // namespace

PsiResult psi_radial(const RadialFn& u, double D, double radius, double s,
                     double rel_tol) {
  if (s == 0.0) throw std::invalid_argument("psi requires s != 0");
  if (!(D > 0.0) || !(radius > 0.0))
    throw std::invalid_argument("psi_radial needs D > 0, radius > 0");
  PsiResult out;
  ProbeStats st = probe_radial(u, radius);
  const double mass = std::pow(radius, D) / D;  // int_0^R r^{D-1} dr
  std::size_t clipped = 0, total = 0;

  EvalBudget budget{50'000'000};
  if (s > 0.0) {
    if (st.max_abs == 0.0) return out;  // u identically 0 on probe
    const double m = st.max_abs;
    auto f = [&](double r) {
      ++total;
      return std::pow(std::abs(u(r)) / m, s) * std::pow(r, D - 1.0);
    };
    QuadResult q = integrate_interval(f, 0.0, radius, 0.0, rel_tol, budget);
    if (!q.converged) throw QuadratureFailure(q.value, q.error);
    out.value = m * std::pow(q.value / mass, 1.0 / s);
  } else {
    double m = std::max(st.min_abs, kClipFloor);
    if (!std::isfinite(m)) throw std::invalid_argument("empty probe");
    auto f = [&](double r) {
      ++total;
      double a = std::abs(u(r));
      if (a < kClipFloor) {
        ++clipped;
        a = kClipFloor;
      }
      return std::pow(m / a, -s) * std::pow(r, D - 1.0);
    };
    QuadResult q = integrate_interval(f, 0.0, radius, 0.0, rel_tol, budget);
    if (!q.converged) throw QuadratureFailure(q.value, q.error);
    out.value = m * std::pow(q.value / mass, 1.0 / s);
    out.clipped_fraction = total ? static_cast<double>(clipped) / total : 0.0;
    out.diverged = clipped > 0;  // +inf integrand flagged via the clip floor
  }
  return out;
}

PsiResult psi(const PointFn& u, const WeightSpec& w, const Ball& b, double s,
              const QuadratureConfig& cfg) {
  if (s == 0.0) throw std::invalid_argument("psi requires s != 0");
  double mass = ball_mass(w, b, cfg);
  if (!(mass > 0.0)) throw std::domain_error("zero mass ball");
  PsiResult out;
  ProbeStats st = probe_ball(u, b);
  std::size_t clipped = 0, total = 0;
  EvalBudget budget{cfg.max_evals};

  if (s > 0.0) {
    if (st.max_abs == 0.0) return out;
    const double m = st.max_abs;
    auto f = [&](std::span<const double> x) {
      ++total;
      return std::pow(std::abs(u(x)) / m, s) * w.eval(x);
    };
    QuadResult q = integrate_ball(f, b.center, b.radius, cfg.abs_tol,
                                  cfg.rel_tol, budget, w.has_axis_kinks());
    if (!q.converged) throw QuadratureFailure(q.value, q.error);
    out.value = m * std::pow(q.value / mass, 1.0 / s);
  } else {
    double m = std::max(st.min_abs, kClipFloor);
    auto f = [&](std::span<const double> x) {
      ++total;
      double a = std::abs(u(x));
      if (a < kClipFloor) {
        ++clipped;
        a = kClipFloor;
      }
      return std::pow(m / a, -s) * w.eval(x);
    };
    QuadResult q = integrate_ball(f, b.center, b.radius, cfg.abs_tol,
                                  cfg.rel_tol, budget, w.has_axis_kinks());
    if (!q.converged) throw QuadratureFailure(q.value, q.error);
    out.value = m * std::pow(q.value / mass, 1.0 / s);
    out.clipped_fraction = total ? static_cast<double>(clipped) / total : 0.0;
    out.diverged = clipped > 0;
  }
  return out;
}

namespace {

// (fint |X|^m w)^{1/m} for a coefficient field over B (origin radial or
// general), then raised to m*kappa by the caller.
double coeff_psi(const CoeffField& x, const WeightSpec& w, const Ball& b,
                 double D, double m, const QuadratureConfig& cfg) {
  if (x.zero()) return 0.0;
  if (x.radial) {
    if (norm2(b.center) != 0.0)
      throw std::invalid_argument("radial coefficient needs origin-centered ball");
    return psi_radial(x.radial, D, b.radius, m).value;
  }
  return psi(x.general, w, b, m, cfg).value;
}

}  // namespace

StructuralReport structural_constants(const StructuralCoefficients& coeffs,
                                      const WeightSpec& w, const Ball& b2r,
                                      double p, double D,
                                      const StructuralParams& params,
                                      const QuadratureConfig& cfg) {
  if (!(p > 1.0) || !(D > p))
    throw std::domain_error("invalid exponent mode: need 1 < p < D");
  double eps = params.eps;
  switch (params.mode) {
    case StructuralMode::local_boundedness:
      if (!(eps > 0.0) || !(eps < 1.0))
        throw std::domain_error("invalid exponent mode: need 0 < eps < 1");
      break;
    case StructuralMode::integrability:
      eps = 0.0;
      break;
    case StructuralMode::lower:
      eps = 0.0;
      if (!(params.r_exp > 0.0) || !(params.r_exp < D) || !(params.t_exp > 0.0))
        throw std::domain_error("invalid exponent mode: need 0 < r < D, t > 0");
      break;
  }

  const double R = b2r.radius / 2.0;
  const double chi = D / (D - p);
  StructuralReport rep;
  rep.R = R;

  auto avg = [&](const CoeffField& x, double m, double kappa, double r_pow) {
    if (x.zero()) return 0.0;
    double base = coeff_psi(x, w, b2r, D, m, cfg);
    return std::pow(R, r_pow) * std::pow(base, m * kappa);
  };

  // b and e share the L^{D/(p-1)} slot in every mode except e in lower mode
  rep.b_R = avg(coeffs.b, D / (p - 1.0), (p - 1.0) / D, p - 1.0);
  if (params.mode == StructuralMode::local_boundedness) {
    rep.c_R = avg(coeffs.c, D / (1.0 - eps), (1.0 - eps) / D, 1.0);
    rep.d_R = avg(coeffs.d, D / (p - eps), (p - eps) / D, p);
    rep.e_R = avg(coeffs.e, D / (p - 1.0), (p - 1.0) / D, p - 1.0);
    rep.f_R = avg(coeffs.f, D / (p - eps), (p - eps) / D, p);
    rep.g_R = avg(coeffs.g, D / (p - eps), (p - eps) / D, p);
  } else if (params.mode == StructuralMode::integrability) {
    rep.c_R = avg(coeffs.c, D, 1.0 / D, 1.0);
    rep.d_R = avg(coeffs.d, D / p, p / D, p);
    rep.e_R = avg(coeffs.e, D / (p - 1.0), (p - 1.0) / D, p - 1.0);
    rep.f_R = avg(coeffs.f, D / p, p / D, p);
    rep.g_R = avg(coeffs.g, D / p, p / D, p);
  } else {
    const double r = params.r_exp, t = params.t_exp;
    rep.c_R = avg(coeffs.c, D, 1.0 / D, 1.0);
    rep.d_R = avg(coeffs.d, D / p, p / D, p);
    rep.e_R = avg(coeffs.e, D * r / (D - r), 1.0 / (chi * r) / (D * r / (D - r)), p - 1.0);
    rep.f_R = avg(coeffs.f, r, 1.0 / r, p);
    rep.g_R = avg(coeffs.g, t, 1.0 / t, p);
  }

  rep.k_R = std::pow(rep.e_R + rep.f_R, 1.0 / (p - 1.0)) + std::pow(rep.g_R, 1.0 / p);
  return rep;
}

NormLedger moser_ledger(const RadialFn& u_fine, const RadialFn& u_coarse,
                        double p, double D, double base_radius, double k,
                        double s_cap, double agreement_tol) {
  if (!(p > 1.0) || !(D > p)) throw std::invalid_argument("need 1 < p < D");
  NormLedger led;
  led.p = p;
  led.D = D;
  led.k = k;
  led.chi = D / (D - p);
  led.base_radius = base_radius;

  auto ubar_fine = [&](double r) { return std::abs(u_fine(r)) + k; };
  auto ubar_coarse = [&](double r) { return std::abs(u_coarse(r)) + k; };

  // rows while s_n = p chi^n stays under the cap
  std::vector<double> s_list, h_list;
  for (int n = 0;; ++n) {
    double s = p * std::pow(led.chi, n);
    if (s > s_cap * (1.0 + 1e-12)) break;
    s_list.push_back(s);
    h_list.push_back(1.0 + std::pow(2.0, -n));
    if (s_list.size() > 200) break;
  }

  // rows from the fine sampling; every row must be stable under refinement
  for (std::size_t n = 0; n < s_list.size(); ++n) {
    LedgerRow row;
    row.n = static_cast<int>(n);
    row.s = s_list[n];
    row.h = h_list[n];
    row.psi = psi_radial(ubar_fine, D, row.h, row.s).value;
    double check = psi_radial(ubar_coarse, D, row.h, row.s).value;
    led.resolution_gap = std::max(
        led.resolution_gap, std::abs(row.psi - check) / std::max(row.psi, 1e-300));
    led.rows.push_back(row);
  }
  if (led.resolution_gap > agreement_tol) throw std::runtime_error("under-resolved");
  for (std::size_t n = 0; n + 1 < led.rows.size(); ++n)
    led.growth.push_back(led.rows[n + 1].psi / led.rows[n].psi);

  ProbeStats inner = probe_radial([&](double r) { return u_fine(r); }, 1.0);
  ProbeStats base = probe_radial([&](double r) { return u_fine(r); }, base_radius);
  led.sup_inner = inner.max_abs;
  led.sup_base = base.max_abs;
  led.psi_base = psi_radial([&](double r) { return std::abs(u_fine(r)); }, D,
                            base_radius, p)
                     .value;
  led.c_meas = led.sup_inner / (led.psi_base + k);
  return led;
}

HarnackReport harnack_report(const Field& u, const Vec& center, double R,
                             double k_R) {
  const Grid& g = *u.grid;
  HarnackReport rep;
  rep.k = k_R;
  const double R3 = 3.0 * R;

  auto dist2 = [&](int i, int j) {
    double dx = g.x_of(i) - center[0];
    double dy = g.n == 2 ? g.y_of(j) - (center.size() > 1 ? center[1] : 0.0) : 0.0;
    return dx * dx + dy * dy;
  };

  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i) {
      double d2 = dist2(i, j);
      if (d2 < R3 * R3 && u.values[g.index(i, j)] < 0.0)
        throw std::domain_error("negative samples on B_3R");
    }

  rep.max_value = -std::numeric_limits<double>::infinity();
  rep.min_value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i) {
      if (dist2(i, j) >= R * R) continue;
      int idx = g.index(i, j);
      double v = u.values[idx];
      ++rep.nodes_in_ball;
      if (v > rep.max_value) {
        rep.max_value = v;
        rep.argmax_node = idx;
      }
      if (v < rep.min_value) {
        rep.min_value = v;
        rep.argmin_node = idx;
      }
    }
  if (rep.nodes_in_ball == 0) throw std::invalid_argument("no grid nodes in B_R");
  rep.c_meas = rep.max_value / (rep.min_value + k_R);

  // internal invariance probe: u -> 2u keeps indices and, for k = 0, C_meas
  if (k_R == 0.0) {
    int amax = -1, amin = -1;
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        if (dist2(i, j) >= R * R) continue;
        int idx = g.index(i, j);
        double v = 2.0 * u.values[idx];
        if (v > mx) { mx = v; amax = idx; }
        if (v < mn) { mn = v; amin = idx; }
      }
    rep.scaling_check = amax == rep.argmax_node && amin == rep.argmin_node &&
                        mx / mn == rep.c_meas;
  } else {
    rep.scaling_check = true;  // not applicable with a shift
  }
  return rep;
}

OscillationReport oscillation_report(const Field& u, const Vec& x0, double r0,
                                     int n_radii, double eps, double p) {
  if (n_radii < 4) throw std::invalid_argument("need >= 4 radii");
  const Grid& g = *u.grid;
  OscillationReport rep;
  rep.eps_over_p = eps / p;

  for (int k = 0; k < n_radii; ++k) {
    double r = r0 * std::pow(3.0, -k);
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    int count = 0;
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        double dx = g.x_of(i) - x0[0];
        double dy = g.n == 2 ? g.y_of(j) - (x0.size() > 1 ? x0[1] : 0.0) : 0.0;
        if (dx * dx + dy * dy >= r * r) continue;
        double v = u.values[g.index(i, j)];
        mx = std::max(mx, v);
        mn = std::min(mn, v);
        ++count;
      }
    if (count == 0) throw std::invalid_argument("no grid nodes in smallest ball");
    rep.radii.push_back(r);
    rep.omega.push_back(mx - mn);
  }

  double theta = 0.0;
  for (std::size_t k = 0; k + 1 < rep.omega.size(); ++k) {
    double ratio = rep.omega[k] > 0.0 ? rep.omega[k + 1] / rep.omega[k] : 0.0;
    rep.ratios.push_back(ratio);
    if (rep.omega[k] > 0.0 && rep.omega[k + 1] > 0.0)
      theta = std::max(theta, ratio);
  }
  rep.theta_fit = theta;

  // log-log fit of omega against r over radii with positive oscillation
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < rep.omega.size(); ++k)
    if (rep.omega[k] > 0.0) {
      xs.push_back(std::log(rep.radii[k]));
      ys.push_back(std::log(rep.omega[k]));
    }
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      mx += xs[k];
      my += ys[k];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
      syy += (ys[k] - my) * (ys[k] - my);
    }
    rep.holder_exponent = sxy / sxx;
    rep.holder_r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  }
  return rep;
}

double bmo_seminorm(const PointFn& v, const WeightSpec& w,
                    const std::vector<Ball>& balls,
                    const QuadratureConfig& cfg) {
  double sup = 0.0;
  for (const Ball& b : balls) {
    double mass = ball_mass(w, b, cfg);
    if (!(mass > 0.0)) throw std::domain_error("zero mass ball");
    EvalBudget budget{cfg.max_evals};
    auto fw = [&](std::span<const double> x) { return v(x) * w.eval(x); };
    QuadResult mean_q = integrate_ball(fw, b.center, b.radius, cfg.abs_tol,
                                       cfg.rel_tol, budget, w.has_axis_kinks());
    if (!mean_q.converged) throw QuadratureFailure(mean_q.value, mean_q.error);
    double mean = mean_q.value / mass;
    auto dev = [&](std::span<const double> x) {
      return std::abs(v(x) - mean) * w.eval(x);
    };
    EvalBudget budget2{cfg.max_evals};
    QuadResult dev_q = integrate_ball(dev, b.center, b.radius, cfg.abs_tol,
                                      cfg.rel_tol, budget2, w.has_axis_kinks());
    if (!dev_q.converged) throw QuadratureFailure(dev_q.value, dev_q.error);
    sup = std::max(sup, dev_q.value / mass);
  }
  return sup;
}

double bmo_seminorm_radial(const RadialFn& v, double D,
                           std::span<const double> radii, double rel_tol) {
  double sup = 0.0;
  EvalBudget budget{100'000'000};
  for (double R : radii) {
    double mass = std::pow(R, D) / D;
    auto fw = [&](double r) { return v(r) * std::pow(r, D - 1.0); };
    QuadResult mean_q = integrate_interval(fw, 0.0, R, 0.0, rel_tol, budget);
    double mean = mean_q.value / mass;
    auto dev = [&](double r) {
      return std::abs(v(r) - mean) * std::pow(r, D - 1.0);
    };
    QuadResult dev_q = integrate_interval(dev, 0.0, R, 0.0, rel_tol, budget);
    sup = std::max(sup, dev_q.value / mass);
  }
  return sup;
}

TailReport tail_decay_radial(const RadialFn& u, double D, double q,
                             std::span<const double> R_list, double r_outer,
                             double rel_tol) {
  TailReport rep;
  EvalBudget budget{200'000'000};
  for (double R : R_list) {
    auto f = [&](double r) {
      return std::pow(std::abs(u(r)), q) * std::pow(r, D - 1.0);
    };
    QuadResult qr = integrate_interval(f, R, r_outer, 0.0, rel_tol, budget);
    rep.R_list.push_back(R);
    rep.f.push_back(qr.value);
  }
  rep.theta_hat = 0.0;
  for (std::size_t i = 0; i < rep.R_list.size(); ++i) {
    double R2 = 2.0 * rep.R_list[i];
    for (std::size_t j = 0; j < rep.R_list.size(); ++j) {
      if (std::abs(rep.R_list[j] - R2) > 1e-9 * R2) continue;
      if (!(rep.f[i] > 0.0)) {
        ++rep.skipped;
        continue;
      }
      TailPair pair{rep.R_list[i], rep.f[j] / rep.f[i]};
      rep.pairs.push_back(pair);
      rep.theta_hat = std::max(rep.theta_hat, pair.theta);
    }
  }
  rep.tau_hat = rep.theta_hat > 0.0 ? -std::log2(rep.theta_hat) / q : 0.0;
  return rep;
}

TailReport tail_decay_field(const Field& u, const WeightSpec& w, double q,
                            std::span<const double> R_list, const Vec& center) {
  const Grid& g = *u.grid;
  TailReport rep;
  double measure = g.n == 1 ? g.h : g.h * g.h;
  std::array<double, 2> x{};
  for (double R : R_list) {
    double acc = 0.0;
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        x[0] = g.x_of(i);
        x[1] = g.n == 2 ? g.y_of(j) : 0.0;
        double dx = x[0] - center[0];
        double dy = g.n == 2 ? x[1] - (center.size() > 1 ? center[1] : 0.0) : 0.0;
        if (dx * dx + dy * dy <= R * R) continue;
        acc += std::pow(std::abs(u.values[g.index(i, j)]), q) *
               w.eval(std::span<const double>(x.data(), g.n)) * measure;
      }
    rep.R_list.push_back(R);
    rep.f.push_back(acc);
  }
  for (std::size_t i = 0; i < rep.R_list.size(); ++i) {
    double R2 = 2.0 * rep.R_list[i];
    for (std::size_t j = 0; j < rep.R_list.size(); ++j) {
      if (std::abs(rep.R_list[j] - R2) > 1e-9 * R2) continue;
      if (!(rep.f[i] > 0.0)) {
        ++rep.skipped;
        continue;
      }
      TailPair pair{rep.R_list[i], rep.f[j] / rep.f[i]};
      rep.pairs.push_back(pair);
      rep.theta_hat = std::max(rep.theta_hat, pair.theta);
    }
  }
  rep.tau_hat = rep.theta_hat > 0.0 ? -std::log2(rep.theta_hat) / q : 0.0;
  return rep;
}

ExponentChain exponent_chain(double r, double t, double p, double D) {
  if (!(r > 0.0) || !(t > 0.0)) throw std::invalid_argument("need r, t > 0");
  if (!(p > 1.0) || !(p < D)) throw std::invalid_argument("need 1 < p < D");
  ExponentChain out;
  out.lhs = (1.0 / (p - 1.0)) * (1.0 / r - p / D);
  out.rhs = (1.0 / p) * (1.0 / t - p / D);
  if (std::abs(out.lhs - out.rhs) > 1e-12)
    throw std::domain_error("inconsistent (r,t) pair: sides " +
                            std::to_string(out.lhs) + " and " +
                            std::to_string(out.rhs));
  out.s = 1.0 / out.lhs;
  double s_crit = D * p / (D - p);
  if (out.s < s_crit - 1e-9)
    throw std::domain_error("below critical range");
  return out;
}

DecayCheck decay_rate_check(std::span<const double> r,
                               std::span<const double> u_abs, double p,
                               double D, double R0) {
  DecayFit fit = decay_fit(r, u_abs, R0, std::numeric_limits<double>::infinity());
  DecayCheck out;
  out.fitted_exponent = fit.exponent;
  out.lambda_hat = fit.exponent - (D - p) / p;
  out.ci_halfwidth = 1.96 * fit.slope_std_error;
  out.no_strict_improvement =
      out.lambda_hat <= std::max(1e-9, 2.0 * out.ci_halfwidth);
  return out;
}

}  // namespace wplab
