#include "wplab/weight.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace wplab {

namespace {

double axis_pow(double t, double a) {
  if (a == 0.0) return 1.0;
  double m = std::abs(t);
  if (m == 0.0) {
    if (a < 0.0) throw SingularPoint();
    return 0.0;
  }
  return std::pow(m, a);
}

}  // namespace

WeightSpec WeightSpec::constant(double c, int dim) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("constant weight must be positive");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  WeightSpec w;
  w.kind_ = WeightKind::constant;
  w.dim_ = dim;
  w.c_ = c;
  return w;
}

WeightSpec WeightSpec::power(double a, int dim) {
  if (!std::isfinite(a)) throw std::invalid_argument("power exponent must be finite");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  WeightSpec w;
  w.kind_ = WeightKind::power;
  w.dim_ = dim;
  w.a_ = a;
  return w;
}

WeightSpec WeightSpec::monomial(std::vector<double> exponents) {
  for (double a : exponents)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw std::invalid_argument("monomial exponents must satisfy a_i >= 0");
  return monomial_unchecked(std::move(exponents));
}

WeightSpec WeightSpec::monomial_unchecked(std::vector<double> exponents) {
  if (exponents.empty()) throw std::invalid_argument("monomial needs >= 1 exponent");
  WeightSpec w;
  w.kind_ = WeightKind::monomial;
  w.dim_ = static_cast<int>(exponents.size());
  w.exps_ = std::move(exponents);
  return w;
}

WeightSpec WeightSpec::product(std::vector<WeightSpec> factors) {
  if (factors.empty()) throw std::invalid_argument("product needs >= 1 factor");
  int d = factors.front().dim();
  for (const auto& f : factors)
    if (f.dim() != d) throw std::invalid_argument("product factors must share dimension");
  WeightSpec w;
  w.kind_ = WeightKind::product;
  w.dim_ = d;
  w.factors_ = std::move(factors);
  return w;
}

double WeightSpec::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("point dimension mismatch");
  switch (kind_) {
    case WeightKind::constant:
      return c_;
    case WeightKind::power:
      return axis_pow(norm2(x), a_);
    case WeightKind::monomial: {
      double v = 1.0;
      for (int i = 0; i < dim_; ++i) v *= axis_pow(x[i], exps_[i]);
      return v;
    }
    case WeightKind::product: {
      double v = 1.0;
      for (const auto& f : factors_) v *= f.eval(x);
      return v;
    }
  }
  return 1.0;
}

bool WeightSpec::has_axis_kinks() const {
  switch (kind_) {
    case WeightKind::constant:
      return false;
    case WeightKind::power:
      return a_ != 0.0;
    case WeightKind::monomial: {
      for (double a : exps_)
        if (a != 0.0) return true;
      return false;
    }
    case WeightKind::product: {
      for (const auto& f : factors_)
        if (f.has_axis_kinks()) return true;
      return false;
    }
  }
  return false;
}

double WeightSpec::total_degree() const {
  switch (kind_) {
    case WeightKind::constant:
      return 0.0;
    case WeightKind::power:
      return a_;
    case WeightKind::monomial: {
      double s = 0.0;
      for (double a : exps_) s += a;
      return s;
    }
    case WeightKind::product: {
      double s = 0.0;
      for (const auto& f : factors_) s += f.total_degree();
      return s;
    }
  }
  return 0.0;
}

std::optional<SeparableForm> WeightSpec::separable() const {
  SeparableForm out;
  out.exps.assign(dim_, 0.0);
  switch (kind_) {
    case WeightKind::constant:
      out.scale = c_;
      return out;
    case WeightKind::power:
      if (dim_ == 1) {
        out.exps[0] = a_;
        return out;
      }
      if (a_ == 0.0) return out;
      return std::nullopt;
    case WeightKind::monomial:
      out.exps = exps_;
      return out;
    case WeightKind::product: {
      for (const auto& f : factors_) {
        auto sub = f.separable();
        if (!sub) return std::nullopt;
        out.scale *= sub->scale;
        for (int i = 0; i < dim_; ++i) out.exps[i] += sub->exps[i];
      }
      return out;
    }
  }
  return std::nullopt;
}

std::optional<PurePowerForm> WeightSpec::pure_power() const {
  PurePowerForm out;
  switch (kind_) {
    case WeightKind::constant:
      out.scale = c_;
      return out;
    case WeightKind::power:
      out.exponent = a_;
      return out;
    case WeightKind::monomial: {
      for (double a : exps_)
        if (a != 0.0) return std::nullopt;
      return out;
    }
    case WeightKind::product: {
      for (const auto& f : factors_) {
        auto sub = f.pure_power();
        if (!sub) return std::nullopt;
        out.scale *= sub->scale;
        out.exponent += sub->exponent;
      }
      return out;
    }
  }
  return std::nullopt;
}

bool WeightSpec::integrable_on_ball(const Ball& b) const {
  if (auto pp = pure_power()) {
    if (pp->exponent >= 0.0) return true;
    bool contains_origin = norm2(b.center) <= b.radius;
    return !contains_origin || pp->exponent > -static_cast<double>(dim_);
  }
  if (auto sep = separable()) {
    for (int i = 0; i < dim_; ++i) {
      if (sep->exps[i] >= 0.0) continue;
      bool touches_axis = std::abs(b.center[i]) <= b.radius;
      if (touches_axis && sep->exps[i] <= -1.0) return false;
    }
    return true;
  }
  // mixed product of powers and monomials: conservative per-factor check
  for (const auto& f : factors_)
    if (!f.integrable_on_ball(b)) return false;
  return true;
}

bool WeightSpec::integrable_on_cube(const Cube& c) const {
  Ball circ{c.center, c.half_width * std::sqrt(static_cast<double>(dim_))};
  return integrable_on_ball(circ);
}

WeightSpec WeightSpec::ap_dual(double p) const {
  if (!(p > 1.0)) throw std::invalid_argument("A_p requires p > 1");
  const double e = -1.0 / (p - 1.0);
  switch (kind_) {
    case WeightKind::constant:
      return constant(std::pow(c_, e), dim_);
    case WeightKind::power:
      return power(a_ * e, dim_);
    case WeightKind::monomial: {
      std::vector<double> d(exps_);
      for (double& a : d) a *= e;
      return monomial_unchecked(std::move(d));
    }
    case WeightKind::product: {
      std::vector<WeightSpec> d;
      d.reserve(factors_.size());
      for (const auto& f : factors_) d.push_back(f.ap_dual(p));
      return product(std::move(d));
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

std::vector<double> split_doubles(std::string_view s) {
  std::vector<double> out;
  std::string buf(s);
  std::stringstream ss(buf);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::strtod(item.c_str(), nullptr));
  }
  return out;
}

}  // namespace

std::string WeightSpec::compact() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case WeightKind::constant:
      os << "constant:" << c_;
      break;
    case WeightKind::power:
      os << "power:" << a_;
      break;
    case WeightKind::monomial:
      os << "monomial:" << join_doubles(exps_);
      break;
    case WeightKind::product: {
      os << "product:";
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i) os << '|';
        os << factors_[i].compact();
      }
      break;
    }
  }
  return os.str();
}

std::string WeightSpec::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "dimension=" << dim_ << "\n";
  switch (kind_) {
    case WeightKind::constant:
      os << "kind=constant\nvalue=" << c_ << "\n";
      break;
    case WeightKind::power:
      os << "kind=power\nexponent=" << a_ << "\n";
      break;
    case WeightKind::monomial:
      os << "kind=monomial\nexponents=" << join_doubles(exps_) << "\n";
      break;
    case WeightKind::product:
      os << "kind=product\nfactors=" << factors_.size() << "\n";
      for (std::size_t i = 0; i < factors_.size(); ++i)
        os << "factor." << i << "=" << factors_[i].compact() << "\n";
      break;
  }
  return os.str();
}

WeightSpec weight_from_compact(std::string_view text, int dim) {
  auto colon = text.find(':');
  std::string_view head = text.substr(0, colon);
  std::string_view body = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "constant" || head == "const")
    return WeightSpec::constant(std::strtod(std::string(body).c_str(), nullptr), dim);
  if (head == "power")
    return WeightSpec::power(std::strtod(std::string(body).c_str(), nullptr), dim);
  if (head == "monomial") return WeightSpec::monomial(split_doubles(body));
  if (head == "one" || head == "1") return WeightSpec::constant(1.0, dim);
  if (head == "product") {
    std::vector<WeightSpec> fs;
    std::size_t start = 0;
    while (start <= body.size()) {
      auto bar = body.find('|', start);
      std::string_view part =
          bar == std::string_view::npos ? body.substr(start) : body.substr(start, bar - start);
      if (!part.empty()) fs.push_back(weight_from_compact(part, dim));
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    return WeightSpec::product(std::move(fs));
  }
  throw std::invalid_argument("unknown weight spec: " + std::string(text));
}

WeightSpec weight_from_text(std::string_view text) {
  std::string kind, value, exponent, exponents;
  int dim = 0, nfactors = 0;
  std::vector<std::string> factor_lines;
  std::string buf(text);
  std::stringstream ss(buf);
  std::string line;
  while (std::getline(ss, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "kind") kind = val;
    else if (key == "dimension") dim = std::atoi(val.c_str());
    else if (key == "value") value = val;
    else if (key == "exponent") exponent = val;
    else if (key == "exponents") exponents = val;
    else if (key == "factors") nfactors = std::atoi(val.c_str());
    else if (key.rfind("factor.", 0) == 0) factor_lines.push_back(val);
  }
  if (dim < 1) throw std::invalid_argument("weight text missing dimension");
  if (kind == "constant")
    return WeightSpec::constant(std::strtod(value.c_str(), nullptr), dim);
  if (kind == "power")
    return WeightSpec::power(std::strtod(exponent.c_str(), nullptr), dim);
  if (kind == "monomial") return WeightSpec::monomial(split_doubles(exponents));
  if (kind == "product") {
    if (static_cast<int>(factor_lines.size()) != nfactors)
      throw std::invalid_argument("weight text factor count mismatch");
    std::vector<WeightSpec> fs;
    for (const auto& f : factor_lines) fs.push_back(weight_from_compact(f, dim));
    return WeightSpec::product(std::move(fs));
  }
  throw std::invalid_argument("weight text missing kind");
}

}  // namespace wplab
