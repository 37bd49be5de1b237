#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wplab/geometry.hpp"

namespace wplab {

enum class WeightKind { constant, power, monomial, product };

/// Signals evaluation of a weight at a point where it is infinite
/// (negative exponent on a vanishing coordinate or at the origin).
class SingularPoint : public std::domain_error {
 public:
  SingularPoint() : std::domain_error("singular point") {}
};

/// Per-axis factorization w(x) = scale * prod |x_i|^{exps[i]}.
struct SeparableForm {
  double scale = 1.0;
  std::vector<double> exps;
};

/// Radial form w(x) = scale * |x|^a.
struct PurePowerForm {
  double scale = 1.0;
  double exponent = 0.0;
};

/// Symbolic weight: constant c, power |x|^a, monomial prod |x_i|^{a_i}, or a
/// finite product of those. Evaluation is finite and positive wherever all
/// coordinates are nonzero. Construction is permissive about integrability
/// (e.g. power a <= -N is representable); mass operations check it per region
/// so that A_p probes can report violations instead of failing up front.
class WeightSpec {
 public:
  static WeightSpec constant(double c, int dim);
  static WeightSpec power(double a, int dim);
  static WeightSpec monomial(std::vector<double> exponents);  // a_i >= 0
  static WeightSpec product(std::vector<WeightSpec> factors);

  WeightKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double constant_value() const { return c_; }
  double power_exponent() const { return a_; }
  const std::vector<double>& monomial_exponents() const { return exps_; }
  const std::vector<WeightSpec>& factors() const { return factors_; }

  double eval(std::span<const double> x) const;

  /// True unless the weight is constant; drives kink-splitting in quadrature.
  bool has_axis_kinks() const;

  double total_degree() const;

  /// N + total degree: the doubling dimension of every implemented family.
  double effective_dimension() const { return dim_ + total_degree(); }

  std::optional<SeparableForm> separable() const;
  std::optional<PurePowerForm> pure_power() const;

  bool integrable_on_ball(const Ball& b) const;
  bool integrable_on_cube(const Cube& c) const;

  /// w^{-1/(p-1)}, the dual weight entering the A_p condition.
  WeightSpec ap_dual(double p) const;

  std::string compact() const;                 // e.g. "monomial:1,1"
  std::string to_text() const;                 // key=value lines
  bool operator==(const WeightSpec&) const = default;

 private:
  WeightSpec() = default;
  static WeightSpec monomial_unchecked(std::vector<double> exponents);

  WeightKind kind_ = WeightKind::constant;
  int dim_ = 1;
  double c_ = 1.0;                  // constant
  double a_ = 0.0;                  // power
  std::vector<double> exps_;        // monomial
  std::vector<WeightSpec> factors_; // product
};

WeightSpec weight_from_compact(std::string_view text, int dim);
WeightSpec weight_from_text(std::string_view text);

}  // namespace wplab
