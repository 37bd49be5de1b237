#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wplab/geometry.hpp"
#include "wplab/grid.hpp"
#include "wplab/quadrature.hpp"
#include "wplab/radial_lab.hpp"
#include "wplab/weight.hpp"

namespace wplab {

using PointFn = std::function<double(std::span<const double>)>;
using RadialFn = std::function<double(double)>;

struct PsiResult {
  double value = 0.0;
  double clipped_fraction = 0.0;  // evaluations clipped at the 1e-30 floor
  bool diverged = false;          // s < 0 with u touching zero
};

/// w-averaged s-mean (fint_B |u|^s w)^{1/s}. Negative s uses a clipping
/// floor of 1e-30 and flags clipped evaluations. The integrand is scaled by
/// the sampled sup (inf for s < 0) so that very large |s| neither overflows
/// nor underflows; psi(lambda u) = lambda psi(u) holds bit-exactly for
/// power-of-two lambda.
PsiResult psi(const PointFn& u, const WeightSpec& w, const Ball& b, double s,
              const QuadratureConfig& cfg = {});

/// Radial fast path for origin-centered balls and radial weights: the
/// angular factor cancels and the average reduces to a 1-D integral against
/// r^{D-1} dr, D = N + weight degree.
PsiResult psi_radial(const RadialFn& u, double D, double radius, double s,
                     double rel_tol = 1e-12);

inline double psi_value(const RadialFn& u, double D, double radius, double s,
                        double rel_tol = 1e-12) {
  return psi_radial(u, D, radius, s, rel_tol).value;
}

enum class StructuralMode { local_boundedness, integrability, lower };

/// Coefficient field: at most one of the two callables is set; both unset
/// means the coefficient vanishes identically.
struct CoeffField {
  RadialFn radial;   // radial profile, origin-centered balls only
  PointFn general;
  bool zero() const { return !radial && !general; }
};

struct StructuralCoefficients {
  CoeffField b, c, d, e, f, g;
};

struct StructuralParams {
  StructuralMode mode = StructuralMode::local_boundedness;
  double eps = 0.5;     // local_boundedness: 0 < eps < 1
  double r_exp = 0.0;   // lower mode only
  double t_exp = 0.0;   // lower mode only
};

struct StructuralReport {
  double b_R = 0, c_R = 0, d_R = 0, e_R = 0, f_R = 0, g_R = 0;
  double k_R = 0;
  double R = 0;
};

/// Averaged structural norms b_R..g_R over B_{2R} with the per-mode
/// integrability exponents, and k_R = (e_R + f_R)^{1/(p-1)} + g_R^{1/p}.
StructuralReport structural_constants(const StructuralCoefficients& coeffs,
                                      const WeightSpec& w, const Ball& b2r,
                                      double p, double D,
                                      const StructuralParams& params,
                                      const QuadratureConfig& cfg = {});

struct LedgerRow {
  int n = 0;
  double s = 0.0;    // s_n = p chi^n
  double h = 0.0;    // h_n = 1 + 2^{-n}
  double psi = 0.0;  // Psi(s_n, B_{h_n})
};

struct NormLedger {
  std::vector<LedgerRow> rows;
  std::vector<double> growth;  // empirical per-step ratio Psi_{n+1}/Psi_n
  double p = 0, chi = 0, D = 0, k = 0;
  double base_radius = 2.0;
  double sup_inner = 0.0;     // sampled sup of |u| over B_1
  double sup_base = 0.0;      // sampled sup of |u| over the base ball
  double psi_base = 0.0;      // Psi(p, base) of |u|
  double c_meas = 0.0;        // sup_inner / (psi_base + k)
  double resolution_gap = 0.0;
};

/// Moser iteration ledger for a radial field: rows (n, s_n, h_n, Psi). The
/// two samplings guard against under-resolution: their final-row Psi must
/// agree to agreement_tol, otherwise "under-resolved" is thrown.
NormLedger moser_ledger(const RadialFn& u_fine, const RadialFn& u_coarse,
                        double p, double D, double base_radius = 2.0,
                        double k = 0.0, double s_cap = 2048.0,
                        double agreement_tol = 0.01);

struct HarnackReport {
  double max_value = 0.0;
  double min_value = 0.0;
  double c_meas = 0.0;  // max / (min + k)
  int argmax_node = -1;
  int argmin_node = -1;
  double k = 0.0;
  int nodes_in_ball = 0;
  bool scaling_check = false;  // argmax/argmin indices and C invariant under u -> 2u
};

/// max/min probe over the grid nodes inside B_R(center); requires u >= 0 on
/// the surrounding B_{3R}.
HarnackReport harnack_report(const Field& u, const Vec& center, double R,
                             double k_R);

struct OscillationReport {
  std::vector<double> radii;
  std::vector<double> omega;   // max - min over B_{r_k}
  std::vector<double> ratios;  // omega_{k+1}/omega_k, 0 when excluded
  double theta_fit = 0.0;      // max of the valid ratios
  double holder_exponent = 0.0;
  double holder_r2 = 0.0;
  double eps_over_p = 0.0;
};

/// Oscillation decay over radii r0 * 3^{-k}, k = 0..n_radii-1.
OscillationReport oscillation_report(const Field& u, const Vec& x0, double r0,
                                     int n_radii, double eps, double p);

/// sup over the given balls of fint_B |v - v_{B,w}| w.
double bmo_seminorm(const PointFn& v, const WeightSpec& w,
                    const std::vector<Ball>& balls,
                    const QuadratureConfig& cfg = {});

/// Radial version for origin-centered balls under r^{D-1} dr.
double bmo_seminorm_radial(const RadialFn& v, double D,
                           std::span<const double> radii,
                           double rel_tol = 1e-11);

struct TailPair {
  double R = 0.0;
  double theta = 0.0;  // f(2R)/f(R)
};

struct TailReport {
  std::vector<double> R_list;
  std::vector<double> f;  // tail masses per R
  std::vector<TailPair> pairs;
  double theta_hat = 0.0;
  double tau_hat = 0.0;  // -(1/q) log2 theta_hat
  int skipped = 0;       // pairs with f(R) = 0
};

/// Tail masses f(R) = int_{r > R} |u|^q r^{D-1} dr up to r_outer (per unit
/// sphere measure) and the doubling recursion ratios.
TailReport tail_decay_radial(const RadialFn& u, double D, double q,
                             std::span<const double> R_list, double r_outer,
                             double rel_tol = 1e-10);

/// Grid variant: f(R) = sum over nodes outside B_R of |u|^q w h^N.
TailReport tail_decay_field(const Field& u, const WeightSpec& w, double q,
                            std::span<const double> R_list, const Vec& center);

struct ExponentChain {
  double s = 0.0;
  double lhs = 0.0;  // (1/(p-1)) (1/r - p/D)
  double rhs = 0.0;  // (1/p)    (1/t - p/D)
};

/// Validates the exponent relation and returns the common value s.
ExponentChain exponent_chain(double r, double t, double p, double D);

struct DecayCheck {
  double fitted_exponent = 0.0;
  double lambda_hat = 0.0;  // fitted exponent - (D-p)/p
  double ci_halfwidth = 0.0;
  bool no_strict_improvement = false;
};

/// Fits |u| <= C |x|^{-(D-p)/p - lambda} on the tail r >= R0.
DecayCheck decay_rate_check(std::span<const double> r,
                               std::span<const double> u_abs, double p,
                               double D, double R0);

}  // namespace wplab
