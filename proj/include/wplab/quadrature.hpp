#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wplab/geometry.hpp"
#include "wplab/rng.hpp"

namespace wplab {

enum class QuadMethod { exact_product, adaptive, monte_carlo };

struct QuadratureConfig {
  QuadMethod method = QuadMethod::adaptive;
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;
  std::size_t max_evals = 20'000'000;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;  // monte_carlo only
};

/// Raised when the evaluation budget runs out before the tolerance is met.
/// Carries the best estimate obtained so far and its error bound.
class QuadratureFailure : public std::runtime_error {
 public:
  QuadratureFailure(double estimate, double error_bound)
      : std::runtime_error("quadrature failure: budget exhausted (estimate " +
                           std::to_string(estimate) + ", error bound " +
                           std::to_string(error_bound) + ")"),
        estimate(estimate),
        error_bound(error_bound) {}

  double estimate;
  double error_bound;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

struct EvalBudget {
  std::size_t remaining;
  bool charge(std::size_t n) {
    if (remaining < n) {
      remaining = 0;
      return false;
    }
    remaining -= n;
    return true;
  }
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1,1] (QUADPACK values).
inline constexpr std::array<double, 8> kGK15Nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kGK15WeightsK = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGK15WeightsG = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
void gk15_panel(F& f, double lo, double hi, double& value, double& error) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kGK15Nodes[i]);
    fv[14 - i] = f(c + h * kGK15Nodes[i]);
  }
  fv[7] = f(c);
  double ik = kGK15WeightsK[7] * fv[7];
  for (int i = 0; i < 7; ++i) ik += kGK15WeightsK[i] * (fv[i] + fv[14 - i]);
  double ig = kGK15WeightsG[3] * fv[7];
  for (int i = 0; i < 3; ++i)
    ig += kGK15WeightsG[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  value = ik * h;
  error = std::abs((ik - ig) * h);
}

struct Panel {
  double lo, hi, value, error;
  std::uint64_t id;  // insertion order, deterministic tie-break
  bool operator<(const Panel& o) const {
    if (error != o.error) return error < o.error;
    return id > o.id;
  }
};

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [lo, hi]. `breaks` lists
/// interior points where the integrand has a kink (e.g. a weight axis);
/// initial panels are split there and GK nodes never land on them.
template <class F>
QuadResult integrate_interval(F&& f, double lo, double hi, double abs_tol,
                              double rel_tol, EvalBudget& budget,
                              std::span<const double> breaks = {}) {
  QuadResult out;
  if (!(hi > lo)) return out;

  std::vector<double> knots;
  knots.push_back(lo);
  for (double b : breaks)
    if (b > lo && b < hi) knots.push_back(b);
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());

  std::priority_queue<detail::Panel> queue;
  std::uint64_t next_id = 0;
  double total = 0.0, total_err = 0.0;
  bool exhausted = false;

  auto push_panel = [&](double a, double b) {
    double v, e;
    if (!budget.charge(15)) exhausted = true;
    detail::gk15_panel(f, a, b, v, e);
    total += v;
    total_err += e;
    queue.push(detail::Panel{a, b, v, e, next_id++});
  };

  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    push_panel(knots[i], knots[i + 1]);

  const double span_floor = (hi - lo) * 1e-15;
  while (!exhausted) {
    double target = std::max(abs_tol, rel_tol * std::abs(total));
    if (total_err <= target) break;
    detail::Panel worst = queue.top();
    if (worst.hi - worst.lo <= span_floor) break;  // resolution floor
    queue.pop();
    total -= worst.value;
    total_err -= worst.error;
    double mid = 0.5 * (worst.lo + worst.hi);
    push_panel(worst.lo, mid);
    push_panel(mid, worst.hi);
  }

  out.value = total;
  out.error = total_err;
  out.converged =
      !exhausted && total_err <= std::max(abs_tol, rel_tol * std::abs(total)) * 1.0000001 + 1e-300;
  if (exhausted) out.converged = false;
  return out;
}

namespace detail {

// Recursive slice integration of f over the ball {|x - c| < rho} in the
// trailing dimensions [k, n). Each level substitutes x_k = c_k + rho*sin(theta)
// so the sqrt-type section boundary becomes smooth.
template <class F>
QuadResult ball_recurse(F& f, std::span<const double> center, double rho,
                        int n, int k, std::array<double, 4>& x,
                        double abs_tol, double rel_tol, EvalBudget& budget,
                        bool axis_breaks) {
  if (k == n - 1) {
    auto line = [&](double t) {
      x[k] = center[k] + t;
      return f(std::span<const double>(x.data(), n));
    };
    double br[1];
    std::size_t nb = 0;
    if (axis_breaks && std::abs(center[k]) < rho) br[nb++] = -center[k];
    return integrate_interval(line, -rho, rho, abs_tol, rel_tol, budget,
                              std::span<const double>(br, nb));
  }
  bool ok = true;
  auto slice = [&](double theta) {
    double ct = std::cos(theta);
    x[k] = center[k] + rho * std::sin(theta);
    QuadResult inner =
        ball_recurse(f, center, rho * ct, n, k + 1, x, abs_tol * 0.25 / rho,
                     rel_tol * 0.3, budget, axis_breaks);
    if (!inner.converged) ok = false;
    return inner.value * rho * ct;
  };
  double br[1];
  std::size_t nb = 0;
  if (axis_breaks && std::abs(center[k]) < rho)
    br[nb++] = std::asin(std::clamp(-center[k] / rho, -1.0, 1.0));
  QuadResult outer =
      integrate_interval(slice, -M_PI_2, M_PI_2, abs_tol, rel_tol, budget,
                         std::span<const double>(br, nb));
  outer.converged = outer.converged && ok;
  return outer;
}

template <class F>
QuadResult cube_recurse(F& f, std::span<const double> center,
                        std::span<const double> half, int n, int k,
                        std::array<double, 4>& x, double abs_tol,
                        double rel_tol, EvalBudget& budget, bool axis_breaks) {
  double lo = center[k] - half[k], hi = center[k] + half[k];
  double br[1];
  std::size_t nb = 0;
  if (axis_breaks && lo < 0.0 && hi > 0.0) br[nb++] = 0.0;
  if (k == n - 1) {
    auto line = [&](double t) {
      x[k] = t;
      return f(std::span<const double>(x.data(), n));
    };
    return integrate_interval(line, lo, hi, abs_tol, rel_tol, budget,
                              std::span<const double>(br, nb));
  }
  bool ok = true;
  auto slice = [&](double t) {
    x[k] = t;
    QuadResult inner =
        cube_recurse(f, center, half, n, k + 1, x, abs_tol * 0.25 / half[k],
                     rel_tol * 0.3, budget, axis_breaks);
    if (!inner.converged) ok = false;
    return inner.value;
  };
  QuadResult outer = integrate_interval(slice, lo, hi, abs_tol, rel_tol,
                                        budget, std::span<const double>(br, nb));
  outer.converged = outer.converged && ok;
  return outer;
}

}  // namespace detail

/// Integral of f over an open ball, N <= 4.
template <class F>
QuadResult integrate_ball(F&& f, std::span<const double> center, double radius,
                          double abs_tol, double rel_tol, EvalBudget& budget,
                          bool axis_breaks = true) {
  int n = static_cast<int>(center.size());
  if (n < 1 || n > 4) throw std::invalid_argument("ball dimension must be 1..4");
  std::array<double, 4> x{};
  return detail::ball_recurse(f, center, radius, n, 0, x, abs_tol, rel_tol,
                              budget, axis_breaks);
}

/// Integral of f over an axis-aligned box, N <= 4.
template <class F>
QuadResult integrate_box(F&& f, std::span<const double> center,
                         std::span<const double> half_widths, double abs_tol,
                         double rel_tol, EvalBudget& budget,
                         bool axis_breaks = true) {
  int n = static_cast<int>(center.size());
  if (n < 1 || n > 4) throw std::invalid_argument("box dimension must be 1..4");
  std::array<double, 4> x{};
  return detail::cube_recurse(f, center, half_widths, n, 0, x, abs_tol,
                              rel_tol, budget, axis_breaks);
}

struct McResult {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Plain Monte-Carlo estimate of the ball integral: uniform draws in the
/// bounding box with an inside-ball indicator. Deterministic given the seed.
template <class F>
McResult mc_integrate_ball(F&& f, std::span<const double> center,
                           double radius, std::size_t n_samples,
                           std::uint64_t seed) {
  int n = static_cast<int>(center.size());
  Rng rng(seed);
  double box_vol = std::pow(2.0 * radius, n);
  double sum = 0.0, sum_sq = 0.0;
  std::array<double, 4> x{};
  for (std::size_t i = 0; i < n_samples; ++i) {
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      double t = (2.0 * rng.u01() - 1.0) * radius;
      x[d] = center[d] + t;
      r2 += t * t;
    }
    double v = 0.0;
    if (r2 < radius * radius) v = f(std::span<const double>(x.data(), n));
    sum += v;
    sum_sq += v * v;
  }
  McResult out;
  out.samples = n_samples;
  double mean = sum / static_cast<double>(n_samples);
  double var = std::max(0.0, sum_sq / static_cast<double>(n_samples) - mean * mean);
  out.value = mean * box_vol;
  out.std_error = box_vol * std::sqrt(var / static_cast<double>(n_samples));
  return out;
}

}  // namespace wplab
