#include "wplab/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wplab {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const QuadratureConfig& cfg) {
  const char* m = cfg.method == QuadMethod::adaptive       ? "adaptive"
                  : cfg.method == QuadMethod::exact_product ? "exact_product"
                                                            : "monte_carlo";
  return json{{"method", m},
              {"abs_tol", cfg.abs_tol},
              {"rel_tol", cfg.rel_tol},
              {"max_evals", cfg.max_evals},
              {"seed", cfg.seed}};
}

json to_json(const ExponentReport& r) {
  return json{{"D", r.D}, {"p", r.p}, {"chi", r.chi}, {"q", r.q}};
}

json to_json(const DoublingReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back(json{{"center", s.center},
                           {"radius", s.radius},
                           {"mass", s.mass},
                           {"ratio", s.ratio},
                           {"radius_factor", s.radius_factor}});
  return json{{"gamma_hat", r.gamma_hat},
              {"d_hat", r.d_hat},
              {"d_regression", r.d_regression},
              {"argmax_index", r.argmax_index},
              {"samples", samples}};
}

json to_json(const ApReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"center", row.ball.center},
                        {"radius", row.ball.radius},
                        {"weight_mass", row.weight_mass},
                        {"dual_mass", row.dual_mass},
                        {"constant", row.constant},
                        {"violated", row.violated}});
  return json{{"constant", r.violated ? json("A_p violated (infinite)") : json(r.constant)},
              {"violated", r.violated},
              {"rows", rows}};
}

json to_json(const DecayFit& r) {
  return json{{"exponent", r.exponent},
              {"r2", r.r2},
              {"slope_std_error", r.slope_std_error},
              {"n_used", r.n_used}};
}

json to_json(const DecaySchedule& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(json{{"t", s.t}, {"sigma", s.sigma}});
  return json{{"steps", steps},
              {"final_t", r.final_t},
              {"reached_target", r.reached_target}};
}

json to_json(const BubbleResidual& r) {
  return json{{"c_hat", r.c_hat},
              {"max_rel_dev", r.max_rel_dev},
              {"excluded", r.excluded}};
}

json to_json(const NormLedger& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"n", row.n}, {"s", row.s}, {"h", row.h}, {"psi", row.psi}});
  return json{{"rows", rows},         {"growth", r.growth},
              {"p", r.p},             {"chi", r.chi},
              {"D", r.D},             {"k", r.k},
              {"base_radius", r.base_radius},
              {"sup_inner", r.sup_inner},
              {"sup_base", r.sup_base},
              {"psi_base", r.psi_base},
              {"c_meas", r.c_meas},
              {"resolution_gap", r.resolution_gap}};
}

json to_json(const HarnackReport& r) {
  return json{{"max", r.max_value},
              {"min", r.min_value},
              {"c_meas", r.c_meas},
              {"argmax_node", r.argmax_node},
              {"argmin_node", r.argmin_node},
              {"k", r.k},
              {"nodes_in_ball", r.nodes_in_ball},
              {"scaling_check", r.scaling_check}};
}

json to_json(const OscillationReport& r) {
  return json{{"radii", r.radii},
              {"omega", r.omega},
              {"ratios", r.ratios},
              {"theta_fit", r.theta_fit},
              {"holder_exponent", r.holder_exponent},
              {"holder_r2", r.holder_r2},
              {"eps_over_p", r.eps_over_p}};
}

json to_json(const TailReport& r) {
  json pairs = json::array();
  for (const auto& pr : r.pairs)
    pairs.push_back(json{{"R", pr.R}, {"theta", pr.theta}});
  return json{{"R_list", r.R_list}, {"f", r.f},
              {"pairs", pairs},     {"theta_hat", r.theta_hat},
              {"tau_hat", r.tau_hat}, {"skipped", r.skipped}};
}

json to_json(const ExponentChain& r) {
  return json{{"s", r.s}, {"lhs", r.lhs}, {"rhs", r.rhs}};
}

json to_json(const DecayCheck& r) {
  return json{{"fitted_exponent", r.fitted_exponent},
              {"lambda_hat", r.lambda_hat},
              {"ci_halfwidth", r.ci_halfwidth},
              {"no_strict_improvement", r.no_strict_improvement}};
}

json to_json(const StructuralReport& r) {
  return json{{"b_R", r.b_R}, {"c_R", r.c_R}, {"d_R", r.d_R},
              {"e_R", r.e_R}, {"f_R", r.f_R}, {"g_R", r.g_R},
              {"k_R", r.k_R}, {"R", r.R}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << content;
}

void write_json_report(const std::string& path, json report, json config) {
  report["config"] = std::move(config);
  write_text_file(path, report.dump(2) + "\n");
}

std::string csv_config_header(const json& config) {
  std::ostringstream os;
  for (auto it = config.begin(); it != config.end(); ++it)
    os << "# " << it.key() << "=" << it.value().dump() << "\n";
  return os.str();
}

std::string gnuplot_script(const std::string& csv_name, int x_col, int y_col,
                           const std::string& title, bool log_log) {
  std::ostringstream os;
  os << "set datafile separator ','\n";
  if (log_log) os << "set logscale xy\n";
  os << "set title '" << title << "'\n";
  os << "plot '" << csv_name << "' using " << x_col << ":" << y_col
     << " with linespoints notitle\n";
  return os.str();
}

}  // namespace wplab
