#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wplab/radial_lab.hpp"
#include "oracles.hpp"

using namespace wplab;

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

}  // namespace

TEST_CASE("bubble closed-form values") {
  BubbleParams b1{1.0, 2.0, 3.0};
  CHECK(bubble_value(b1, 0.0) == doctest::Approx(1.0));
  CHECK(bubble_value(b1, 1.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  // tail exponent (D-p)/(p-1) = 2 for p=2, D=4: r^2 U -> 1
  BubbleParams b2{1.0, 2.0, 4.0};
  double r = 2000.0;
  CHECK(r * r * bubble_value(b2, r) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("bubble monotonicity") {
  BubbleParams bp{1.3, 2.5, 5.0};
  double prev = bubble_value(bp, 0.0);
  for (double r = 0.1; r < 30.0; r += 0.37) {
    double v = bubble_value(bp, r);
    CHECK(v < prev);
    prev = v;
  }
  // increasing in a_scale in the tail regime r > (p-1)^{(p-1)/p} a
  for (double r : {4.0, 9.0, 25.0}) {
    double lo = bubble_value(BubbleParams{1.0, 2.5, 5.0}, r);
    double hi = bubble_value(BubbleParams{1.2, 2.5, 5.0}, r);
    CHECK(hi > lo);
  }
}

TEST_CASE("bubble residual: constants recovered") {
  auto rs = log_spaced(0.1, 20.0, 120);

  // p=2, D=3, a=1 is U=(1+r^2)^{-1/2}; -Delta U = 3 U^5
  auto res3 = bubble_residual(2.0, 3.0, 1.0, rs);
  CHECK(res3.c_hat == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(res3.max_rel_dev < 1e-4);

  // p=2, D=4, a=1 is U=(1+r^2)^{-1}; the radial operator gives 8 U^3
  auto res4 = bubble_residual(2.0, 4.0, 1.0, rs);
  CHECK(res4.c_hat == doctest::Approx(8.0).epsilon(1e-4));
  CHECK(res4.max_rel_dev < 1e-4);

  // generic p: still constant
  auto res_p3 = bubble_residual(3.0, 6.0, 1.0, rs);
  CHECK(res_p3.max_rel_dev < 2e-4);
}

TEST_CASE("bubble residual: second-order step decay") {
  auto rs = log_spaced(0.5, 10.0, 40);
  auto coarse = bubble_residual(2.0, 4.0, 1.0, rs, 1e-2);
  auto fine = bubble_residual(2.0, 4.0, 1.0, rs, 5e-3);
  double order = std::log2(coarse.max_rel_dev / fine.max_rel_dev);
  CHECK(order >= 1.9);
}

TEST_CASE("supersolution constant") {
  CHECK(supersolution_constant(2.0, 4.0, 1.0) == doctest::Approx(1.0));
  CHECK(supersolution_constant(3.0, 6.0, 1.0) == doctest::Approx(1.0));

  // p=2, D=N reduces to the classical s(N-2-s)
  for (double N : {3.0, 4.0, 7.0})
    for (double s : {0.5, 1.0, 1.7})
      CHECK(supersolution_constant(2.0, N, s) ==
            doctest::Approx(s * (N - 2.0 - s)).epsilon(1e-13));

  // positive inside (0, (D-p)/(p-1)), root at the right endpoint
  double p = 2.0, D = 5.0;
  double smax = (D - p) / (p - 1.0);
  for (double s = 0.2; s < smax; s += 0.3)
    CHECK(supersolution_constant(p, D, s) > 0.0);
  CHECK(std::abs(supersolution_constant(p, D, smax)) < 1e-12);
  CHECK(supersolution_constant(p, D, smax + 0.3) < 0.0);
  CHECK_THROWS(supersolution_constant(2.0, 4.0, 0.0));
}

TEST_CASE("supersolution residual") {
  auto rs = log_spaced(1.0, 10.0, 60);
  CHECK(supersolution_residual(2.0, 4.0, 1.0, rs) < 1e-6);
  CHECK(supersolution_residual(4.0, 8.0, 1.0, rs) < 1e-5);

  // boundary root: C2 = 0 and the measured operator stays within the FD error
  CHECK(supersolution_residual(2.0, 3.0, 1.0, rs) < 1e-6);

  // convergence order under step halving
  double d1 = supersolution_residual(3.0, 6.0, 1.2, rs, 1e-2);
  double d2 = supersolution_residual(3.0, 6.0, 1.2, rs, 5e-3);
  CHECK(std::log2(d1 / d2) >= 1.9);
}

TEST_CASE("shoot reproduces the closed-form ground state") {
  // -Delta u = u^5 in R^3 with u(0)=1 has u = (1 + r^2/3)^{-1/2}
  ShootingConfig cfg;
  cfg.alpha0 = 1.0;
  cfg.r_max = 50.0;
  auto res = shoot(2.0, 3.0, 6.0, cfg);
  CHECK(res.classification == ShootClass::decaying);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.profile.r.size(); ++i) {
    double r = res.profile.r[i];
    double exact = 1.0 / std::sqrt(1.0 + r * r / 3.0);
    worst = std::max(worst, std::abs(res.profile.u[i] - exact) / exact);
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("shoot scaling symmetry") {
  // u_lambda(r) = lambda u(lambda^{(q-p)/p} r) solves the same equation
  const double p = 2.0, D = 4.0, q = 4.0;
  ShootingConfig base;
  base.alpha0 = 1.0;
  base.r_max = 20.0;
  auto ref = shoot(p, D, q, base);
  test_rng rng(17);
  for (int k = 0; k < 3; ++k) {
    double lambda = rng.uniform(0.5, 2.5);
    double mu = std::pow(lambda, (q - p) / p);
    ShootingConfig scaled = base;
    scaled.alpha0 = lambda;
    scaled.r_max = base.r_max / mu;
    auto sc = shoot(p, D, q, scaled);
    double worst = 0.0;
    for (double r = 0.2; r < scaled.r_max; r += 0.7) {
      double expect = lambda * ref.profile.interp_cubic(mu * r);
      double got = sc.profile.interp_cubic(r);
      worst = std::max(worst, std::abs(got - expect) / std::abs(expect));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("shoot subcritical sign change") {
  ShootingConfig cfg;
  cfg.alpha0 = 10.0;
  cfg.r_max = 50.0;
  auto res = shoot(2.0, 3.0, 4.0, cfg);  // q = 4 < 6 = critical
  CHECK(res.classification == ShootClass::sign_change);
  REQUIRE(res.r_star.has_value());
  CHECK(*res.r_star > 0.0);
  CHECK(*res.r_star < 50.0);
  // the crossing is genuine: u is still positive just before r_star
  double before = res.profile.interp(*res.r_star * 0.98);
  CHECK(before > 0.0);
}

TEST_CASE("shoot handles p != 2") {
  ShootingConfig cfg;
  cfg.alpha0 = 1.0;
  cfg.r_max = 30.0;
  double p = 3.0, D = 6.0;
  double q = D * p / (D - p);  // critical
  auto res = shoot(p, D, q, cfg);
  CHECK(res.classification == ShootClass::decaying);
  CHECK(res.profile.u.back() > 0.0);
  CHECK(res.profile.u.back() < 0.1);

  // p < 2 with the regularized flux inversion; repeat at eps/2
  ShootingConfig cfg2;
  cfg2.alpha0 = 1.0;
  cfg2.r_max = 10.0;
  cfg2.eps = 1e-8;
  double p2 = 1.5, D2 = 3.0;
  double q2 = D2 * p2 / (D2 - p2);
  auto res2 = shoot(p2, D2, q2, cfg2);
  CHECK(res2.profile.u.back() > 0.0);
  ShootingConfig cfg3 = cfg2;
  cfg3.eps = 5e-9;
  auto res3 = shoot(p2, D2, q2, cfg3);
  CHECK(res3.profile.interp(5.0) ==
        doctest::Approx(res2.profile.interp(5.0)).epsilon(1e-6));
}

TEST_CASE("decay_fit") {
  auto rs = log_spaced(1.0, 100.0, 80);
  std::vector<double> u(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) u[i] = std::pow(rs[i], -2.0);
  auto fit = decay_fit(rs, u, 1.0, 100.0);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));

  // bubble tail, p=2 D=4: exponent (D-p)/(p-1) = 2 within 2%
  auto rs2 = log_spaced(10.0, 100.0, 200);
  std::vector<double> ub(rs2.size());
  for (std::size_t i = 0; i < rs2.size(); ++i)
    ub[i] = bubble_value(BubbleParams{1.0, 2.0, 4.0}, rs2[i]);
  auto fitb = decay_fit(rs2, ub, 10.0, 100.0);
  CHECK(fitb.exponent == doctest::Approx(2.0).epsilon(0.02));

  // small multiplicative ripple moves the fit by about its amplitude
  std::vector<double> up(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i)
    up[i] = std::pow(rs[i], -2.0) * (1.0 + 0.01 * std::sin(std::log(rs[i])));
  auto fitp = decay_fit(rs, up, 1.0, 100.0);
  CHECK(std::abs(fitp.exponent - 2.0) < 0.02);

  std::vector<double> few = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> fu = {1.0, 0.5, 0.3, 0.2};
  CHECK_THROWS_WITH_AS(decay_fit(few, fu, 0.5, 5.0), "insufficient tail data",
                       std::runtime_error);
}

TEST_CASE("improved decay schedule") {
  auto sched = improved_decay_schedule(2.0, 4.0, 1.1);
  CHECK(sched.reached_target);
  CHECK(sched.final_t >= 2.0 - 1e-3);
  CHECK(sched.steps.size() < 200);

  CHECK_THROWS_WITH_AS(improved_decay_schedule(2.0, 4.0, 2.0),
                       "initial exponent out of range", std::domain_error);
  CHECK_THROWS_AS(improved_decay_schedule(2.0, 4.0, -0.5), std::domain_error);

  // every emitted pair satisfies the strict inequality as displayed
  double p = 2.0, D = 3.0, q = 6.0;
  auto s2 = improved_decay_schedule(p, D, 0.6);
  CHECK(!s2.steps.empty());
  for (const auto& st : s2.steps) {
    double lhs = st.t + 2.0 + st.sigma + (p - 2.0) * (st.t + st.sigma + 1.0);
    double rhs = st.t * (q - 1.0);
    CHECK(lhs < rhs);
    CHECK(st.t + st.sigma < (D - p) / (p - 1.0));
  }
  CHECK(s2.final_t >= 1.0 - 1e-3);
}
