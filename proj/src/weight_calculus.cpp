#include "wplab/weight_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wplab {

double interval_mass(double a, double lo, double hi) {
  if (!(a > -1.0)) throw std::domain_error("non-integrable exponent");
  if (!(lo <= hi)) throw std::invalid_argument("interval_mass: lo > hi");
  auto primitive = [a](double t) {
    if (t == 0.0) return 0.0;
    double s = t > 0.0 ? 1.0 : -1.0;
    return s * std::pow(std::abs(t), a + 1.0) / (a + 1.0);
  };
  return primitive(hi) - primitive(lo);
}

namespace {

double separable_cube_mass(const SeparableForm& sep, const Cube& c) {
  double m = sep.scale;
  for (std::size_t i = 0; i < sep.exps.size(); ++i)
    m *= interval_mass(sep.exps[i], c.center[i] - c.half_width,
                       c.center[i] + c.half_width);
  return m;
}

// Exact w(B) for scale*|x|^a centered at the origin: integrable iff a > -N.
std::optional<double> exact_ball_mass(const WeightSpec& w, const Ball& b) {
  auto pp = w.pure_power();
  if (!pp) return std::nullopt;
  int n = b.dim();
  if (pp->exponent == 0.0)
    return pp->scale * unit_ball_volume(n) * std::pow(b.radius, n);
  if (norm2(b.center) != 0.0) return std::nullopt;
  double na = n + pp->exponent;
  if (!(na > 0.0)) throw std::domain_error("non-integrable exponent");
  return pp->scale * unit_sphere_area(n) * std::pow(b.radius, na) / na;
}

}  // namespace

double cube_mass(const WeightSpec& w, const Cube& c, const QuadratureConfig& cfg) {
  if (w.dim() != c.dim()) throw std::invalid_argument("cube dimension mismatch");
  require_radius(c.half_width);
  if (cfg.method != QuadMethod::monte_carlo) {
    if (auto sep = w.separable()) return separable_cube_mass(*sep, c);
  }
  if (!w.integrable_on_cube(c)) throw std::domain_error("non-integrable exponent");
  if (cfg.method == QuadMethod::monte_carlo) {
    // draw in the cube itself; indicator-free
    Rng rng(cfg.seed);
    int n = c.dim();
    double vol = std::pow(2.0 * c.half_width, n);
    double sum = 0.0;
    std::array<double, 4> x{};
    std::size_t ns = std::max<std::size_t>(1, cfg.max_evals);
    for (std::size_t i = 0; i < ns; ++i) {
      for (int d = 0; d < n; ++d)
        x[d] = c.center[d] + (2.0 * rng.u01() - 1.0) * c.half_width;
      sum += w.eval(std::span<const double>(x.data(), n));
    }
    return vol * sum / static_cast<double>(ns);
  }
  EvalBudget budget{cfg.max_evals};
  std::vector<double> half(c.dim(), c.half_width);
  auto f = [&](std::span<const double> x) { return w.eval(x); };
  QuadResult r = integrate_box(f, c.center, half, cfg.abs_tol, cfg.rel_tol,
                               budget, w.has_axis_kinks());
  if (!r.converged) throw QuadratureFailure(r.value, r.error);
  return r.value;
}

double ball_mass(const WeightSpec& w, const Ball& b, const QuadratureConfig& cfg) {
  if (w.dim() != b.dim()) throw std::invalid_argument("ball dimension mismatch");
  require_radius(b.radius);
  if (!w.integrable_on_ball(b)) throw std::domain_error("non-integrable exponent");
  if (cfg.method == QuadMethod::monte_carlo)
    return ball_mass_mc(w, b, std::max<std::size_t>(1, cfg.max_evals), cfg.seed).value;
  if (auto exact = exact_ball_mass(w, b)) return *exact;
  if (b.dim() == 1) {
    if (auto sep = w.separable())
      return sep->scale * interval_mass(sep->exps[0], b.center[0] - b.radius,
                                        b.center[0] + b.radius);
  }
  EvalBudget budget{cfg.max_evals};
  auto f = [&](std::span<const double> x) { return w.eval(x); };
  QuadResult r = integrate_ball(f, b.center, b.radius, cfg.abs_tol, cfg.rel_tol,
                                budget, w.has_axis_kinks());
  if (!r.converged) throw QuadratureFailure(r.value, r.error);
  return r.value;
}

McResult ball_mass_mc(const WeightSpec& w, const Ball& b,
                      std::size_t n_samples, std::uint64_t seed) {
  auto f = [&](std::span<const double> x) { return w.eval(x); };
  return mc_integrate_ball(f, b.center, b.radius, n_samples, seed);
}

double doubling_ratio(const WeightSpec& w, const Ball& b, const QuadratureConfig& cfg) {
  double m1 = ball_mass(w, b, cfg);
  double m2 = ball_mass(w, scaled(b, 2.0), cfg);
  return m2 / m1;
}

double doubling_ratio_cube(const WeightSpec& w, const Cube& c, const QuadratureConfig& cfg) {
  double m1 = cube_mass(w, c, cfg);
  double m2 = cube_mass(w, scaled(c, 2.0), cfg);
  return m2 / m1;
}

namespace {

double region_mass(const WeightSpec& w, RegionKind kind, const Vec& center,
                   double radius, const QuadratureConfig& cfg) {
  if (kind == RegionKind::ball) return ball_mass(w, Ball{center, radius}, cfg);
  return cube_mass(w, Cube{center, radius}, cfg);
}

}  // namespace

DoublingReport doubling_dimension(const WeightSpec& w,
                                  const DoublingSweepConfig& sweep,
                                  int n_samples, const QuadratureConfig& cfg) {
  if (n_samples < 1) throw std::invalid_argument("doubling sweep needs >= 1 sample");
  DoublingReport report;
  Rng rng(cfg.seed);
  const int n = w.dim();
  const int origin = std::min(n_samples, std::max(1, sweep.origin_probes));

  // deterministic origin-centered probes, log-spaced radii
  for (int i = 0; i < origin; ++i) {
    double t = origin == 1 ? 0.5 : static_cast<double>(i) / (origin - 1);
    double r = sweep.radius_lo * std::pow(sweep.radius_hi / sweep.radius_lo, t);
    DoublingSample s;
    s.center.assign(n, 0.0);
    s.radius = r;
    s.mass = region_mass(w, sweep.region, s.center, r, cfg);
    s.ratio = region_mass(w, sweep.region, s.center, 2.0 * r, cfg) / s.mass;
    report.samples.push_back(std::move(s));
  }

  for (int i = origin; i < n_samples; ++i) {
    DoublingSample s;
    s.center.resize(n);
    for (int d = 0; d < n; ++d)
      s.center[d] = rng.uniform(-sweep.domain_half_width, sweep.domain_half_width);
    s.radius = rng.log_uniform(sweep.radius_lo, sweep.radius_hi);
    bool wide = sweep.wide_pairs > 0 && (i - origin) % std::max(1, (n_samples - origin) / std::max(1, sweep.wide_pairs)) == 0;
    s.radius_factor = wide ? 4.0 : 2.0;
    s.mass = region_mass(w, sweep.region, s.center, s.radius, cfg);
    s.ratio = region_mass(w, sweep.region, s.center, s.radius_factor * s.radius, cfg) / s.mass;
    report.samples.push_back(std::move(s));
  }

  // sup over genuine factor-2 samples; through-origin least squares of
  // log(mass ratio) against log(radius ratio) over all samples
  double gamma = -std::numeric_limits<double>::infinity();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const auto& s = report.samples[i];
    if (s.radius_factor == 2.0 && s.ratio > gamma) {
      gamma = s.ratio;
      report.argmax_index = i;
    }
    double x = std::log(s.radius_factor);
    double y = std::log(s.ratio);
    sxx += x * x;
    sxy += x * y;
  }
  report.gamma_hat = gamma;
  report.d_hat = std::log2(gamma);
  report.d_regression = sxx > 0.0 ? sxy / sxx : 0.0;
  return report;
}

ExponentReport sobolev_exponents(double D, double p) {
  if (!(p > 1.0)) throw std::domain_error("exponent relation requires p > 1");
  if (!(p < D)) throw std::domain_error("supercritical: exponent undefined");
  ExponentReport r;
  r.D = D;
  r.p = p;
  r.chi = D / (D - p);
  r.q = D * p / (D - p);
  return r;
}

ApReport ap_constant(const WeightSpec& w, double p, const std::vector<Ball>& balls,
                     const QuadratureConfig& cfg) {
  if (!(p > 1.0)) throw std::invalid_argument("A_p requires p > 1");
  if (balls.empty()) throw std::invalid_argument("A_p probe needs >= 1 ball");
  ApReport report;
  WeightSpec dual = w.ap_dual(p);
  for (const Ball& b : balls) {
    ApBallRow row;
    row.ball = b;
    if (!w.integrable_on_ball(b) || !dual.integrable_on_ball(b)) {
      row.violated = true;  // A_p violated (infinite)
      report.violated = true;
      report.rows.push_back(std::move(row));
      continue;
    }
    row.weight_mass = ball_mass(w, b, cfg);
    row.dual_mass = ball_mass(dual, b, cfg);
    double lebesgue = unit_ball_volume(b.dim()) * std::pow(b.radius, b.dim());
    row.constant = row.weight_mass * std::pow(row.dual_mass, p - 1.0) /
                   std::pow(lebesgue, p);
    report.constant = std::max(report.constant, row.constant);
    report.rows.push_back(std::move(row));
  }
  if (report.violated)
    report.constant = std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace wplab
