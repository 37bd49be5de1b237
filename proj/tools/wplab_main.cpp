// Batch driver: every lab operation as a subcommand emitting CSV/JSON
// reports and plot-ready data. Exit codes: 0 success, 1 numerical
// non-convergence, 2 invalid input.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wplab/estimates.hpp"
#include "wplab/grid.hpp"
#include "wplab/radial_lab.hpp"
#include "wplab/report_io.hpp"
#include "wplab/weight_calculus.hpp"

namespace fs = std::filesystem;
using namespace wplab;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

// canned scalar fields for boundary data and right-hand sides:
//   const:v | linear:a,b,c (a + b x + c y) | rpow:e (|x|^e) | sinmix:c,a,b
std::function<double(double, double)> parse_scalar_fn(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : parse_list(spec.substr(colon + 1));
  if (head == "const" && args.size() == 1)
    return [=](double, double) { return args[0]; };
  if (head == "linear" && args.size() == 3)
    return [=](double x, double y) { return args[0] + args[1] * x + args[2] * y; };
  if (head == "rpow" && (args.size() == 1 || args.size() == 2)) {
    double scale = args.size() == 2 ? args[0] : 1.0;
    double expo = args.back();
    return [=](double x, double y) {
      return scale * std::pow(std::sqrt(x * x + y * y), expo);
    };
  }
  if (head == "sinmix" && args.size() == 3)
    return [=](double x, double y) {
      return args[0] + std::sin(args[1] * x) * std::cos(args[2] * y);
    };
  throw CLI::ValidationError("scalar function", "unknown spec: " + spec);
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

struct CommonOpts {
  std::string out = ".";
  std::uint64_t seed = 12345;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::string config;
};

QuadratureConfig quad_config(const CommonOpts& c,
                             QuadMethod m = QuadMethod::adaptive) {
  QuadratureConfig cfg;
  cfg.method = m;
  cfg.rel_tol = c.rel_tol;
  cfg.abs_tol = c.abs_tol;
  cfg.seed = c.seed;
  return cfg;
}

// the output directory is deliberately not embedded: identical runs into
// different directories must stay byte-identical
json common_config(const CommonOpts& c) {
  return json{{"seed", c.seed}, {"rel_tol", c.rel_tol}, {"abs_tol", c.abs_tol}};
}

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--rel-tol", c.rel_tol, "quadrature relative tolerance");
  sub->add_option("--abs-tol", c.abs_tol, "quadrature absolute tolerance");
  sub->add_option("--config", c.config, "key=value config file; flags override");
}

// Merge a key=value config file into the argument list: file values only
// fill options the command line does not already set.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream is(config_path);
  if (!is) throw CLI::ValidationError("--config", "cannot open " + config_path);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (!given) args.push_back(flag + "=" + line.substr(eq + 1));
  }
  return args;
}

int run_app(int argc, char** argv) {
  CLI::App app{"numerical laboratory for weighted p-Laplace diagnostics"};
  app.require_subcommand(1);

  // ---- exponents ----
  {
    auto* sub = app.add_subcommand("exponents", "chi and q from (D, p)");
    auto opts = std::make_shared<CommonOpts>();
    auto D = std::make_shared<double>(4.0);
    auto p = std::make_shared<double>(2.0);
    sub->add_option("--D", *D, "weight dimension")->required();
    sub->add_option("--p", *p, "exponent p")->required();
    add_common(sub, *opts);
    sub->callback([=]() {
      auto rep = sobolev_exponents(*D, *p);
      json cfg = common_config(*opts);
      cfg["D"] = *D;
      cfg["p"] = *p;
      write_json_report(out_path(opts->out, "exponents.json"), to_json(rep), cfg);
      std::cout << "chi=" << fmt(rep.chi) << " q=" << fmt(rep.q) << "\n";
    });
  }

  // ---- dim ----
  {
    auto* sub = app.add_subcommand("dim", "sampled doubling dimension sweep");
    auto opts = std::make_shared<CommonOpts>();
    auto weight = std::make_shared<std::string>("constant:1");
    auto dim = std::make_shared<int>(2);
    auto region = std::make_shared<std::string>("ball");
    auto samples = std::make_shared<int>(100);
    auto rlo = std::make_shared<double>(0x1p-4);
    auto rhi = std::make_shared<double>(4.0);
    auto domain = std::make_shared<double>(10.0);
    sub->add_option("--weight", *weight, "weight spec, e.g. monomial:1,1")->required();
    sub->add_option("--dim", *dim, "ambient dimension");
    sub->add_option("--region", *region, "ball | cube");
    sub->add_option("--samples", *samples, "number of sampled regions");
    sub->add_option("--rlo", *rlo, "smallest radius");
    sub->add_option("--rhi", *rhi, "largest radius");
    sub->add_option("--domain", *domain, "centers drawn from [-L, L]^N");
    add_common(sub, *opts);
    sub->callback([=]() {
      WeightSpec w = weight_from_compact(*weight, *dim);
      DoublingSweepConfig sweep;
      sweep.region = *region == "cube" ? RegionKind::cube : RegionKind::ball;
      sweep.radius_lo = *rlo;
      sweep.radius_hi = *rhi;
      sweep.domain_half_width = *domain;
      auto rep = doubling_dimension(w, sweep, *samples, quad_config(*opts));
      json cfg = common_config(*opts);
      cfg["weight"] = *weight;
      cfg["dim"] = *dim;
      cfg["region"] = *region;
      cfg["samples"] = *samples;
      cfg["rlo"] = *rlo;
      cfg["rhi"] = *rhi;
      cfg["domain"] = *domain;
      write_json_report(out_path(opts->out, "dim.json"), to_json(rep), cfg);
      std::ostringstream csv;
      csv << csv_config_header(cfg);
      csv << "center_x,center_y,radius,mass,ratio\n";
      for (const auto& s : rep.samples) {
        csv << fmt(s.center[0]) << ","
            << fmt(s.center.size() > 1 ? s.center[1] : 0.0) << ","
            << fmt(s.radius) << "," << fmt(s.mass) << "," << fmt(s.ratio) << "\n";
      }
      write_text_file(out_path(opts->out, "dim.csv"), csv.str());
      write_text_file(out_path(opts->out, "dim.gp"),
                      gnuplot_script("dim.csv", 3, 5, "doubling ratios", true));
      std::cout << "D_hat=" << fmt(rep.d_hat) << " gamma_hat=" << fmt(rep.gamma_hat)
                << " D_fit=" << fmt(rep.d_regression) << "\n";
    });
  }

  // ---- ballmass ----
  {
    auto* sub = app.add_subcommand("ballmass", "w(B) for one ball");
    auto opts = std::make_shared<CommonOpts>();
    auto weight = std::make_shared<std::string>("constant:1");
    auto dim = std::make_shared<int>(2);
    auto center = std::make_shared<std::string>("0,0");
    auto radius = std::make_shared<double>(1.0);
    auto method = std::make_shared<std::string>("adaptive");
    auto mc_samples = std::make_shared<std::size_t>(1'000'000);
    sub->add_option("--weight", *weight)->required();
    sub->add_option("--dim", *dim);
    sub->add_option("--center", *center, "comma-separated center");
    sub->add_option("--radius", *radius);
    sub->add_option("--method", *method, "adaptive | exact | mc");
    sub->add_option("--mc-samples", *mc_samples);
    add_common(sub, *opts);
    sub->callback([=]() {
      WeightSpec w = weight_from_compact(*weight, *dim);
      Ball b{parse_list(*center), *radius};
      if (static_cast<int>(b.center.size()) != *dim)
        throw CLI::ValidationError("--center", "dimension mismatch");
      QuadratureConfig cfg = quad_config(
          *opts, *method == "mc" ? QuadMethod::monte_carlo
                                 : *method == "exact" ? QuadMethod::exact_product
                                                      : QuadMethod::adaptive);
      if (*method == "mc") cfg.max_evals = *mc_samples;
      double mass = ball_mass(w, b, cfg);
      json cfg_json = common_config(*opts);
      cfg_json["weight"] = *weight;
      cfg_json["dim"] = *dim;
      cfg_json["center"] = *center;
      cfg_json["radius"] = *radius;
      cfg_json["method"] = *method;
      write_json_report(out_path(opts->out, "ballmass.json"),
                        json{{"mass", mass}}, cfg_json);
      std::cout << "mass=" << fmt(mass) << "\n";
    });
  }

  // ---- ap ----
  {
    auto* sub = app.add_subcommand("ap", "Muckenhoupt A_p probe over balls");
    auto opts = std::make_shared<CommonOpts>();
    auto weight = std::make_shared<std::string>("constant:1");
    auto dim = std::make_shared<int>(2);
    auto p = std::make_shared<double>(2.0);
    auto ball_specs = std::make_shared<std::vector<std::string>>();
    sub->add_option("--weight", *weight)->required();
    sub->add_option("--dim", *dim);
    sub->add_option("--p", *p)->required();
    sub->add_option("--ball", *ball_specs, "cx,cy,r (repeatable)")->required();
    add_common(sub, *opts);
    sub->callback([=]() {
      WeightSpec w = weight_from_compact(*weight, *dim);
      std::vector<Ball> balls;
      for (const auto& bs : *ball_specs) {
        auto v = parse_list(bs);
        if (static_cast<int>(v.size()) != *dim + 1)
          throw CLI::ValidationError("--ball", "expected cx[,cy],r");
        Ball b;
        b.center.assign(v.begin(), v.end() - 1);
        b.radius = v.back();
        balls.push_back(std::move(b));
      }
      auto rep = ap_constant(w, *p, balls, quad_config(*opts));
      json cfg = common_config(*opts);
      cfg["weight"] = *weight;
      cfg["dim"] = *dim;
      cfg["p"] = *p;
      write_json_report(out_path(opts->out, "ap.json"), to_json(rep), cfg);
      if (rep.violated)
        std::cout << "A_p violated (infinite)\n";
      else
        std::cout << "A_p=" << fmt(rep.constant) << "\n";
    });
  }

  // ---- shoot ----
  {
    auto* sub = app.add_subcommand("shoot", "radial shooting integrator");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(3.0);
    auto q = std::make_shared<double>(0.0);
    auto alpha = std::make_shared<double>(1.0);
    auto rmax = std::make_shared<double>(50.0);
    auto ode_tol = std::make_shared<double>(1e-9);
    auto eps = std::make_shared<double>(0.0);
    sub->add_option("--p", *p)->required();
    sub->add_option("--D", *D)->required();
    sub->add_option("--q", *q, "defaults to the critical Dp/(D-p)");
    sub->add_option("--alpha", *alpha, "u(0)");
    sub->add_option("--rmax", *rmax);
    sub->add_option("--ode-tol", *ode_tol);
    sub->add_option("--eps", *eps, "flux regularization for p < 2");
    add_common(sub, *opts);
    sub->callback([=]() {
      double qq = *q > 0.0 ? *q : *D * *p / (*D - *p);
      ShootingConfig cfg;
      cfg.alpha0 = *alpha;
      cfg.r_max = *rmax;
      cfg.rel_tol = *ode_tol;
      cfg.eps = *eps;
      auto res = shoot(*p, *D, qq, cfg);
      json cfg_json = common_config(*opts);
      cfg_json["p"] = *p;
      cfg_json["D"] = *D;
      cfg_json["q"] = qq;
      cfg_json["alpha"] = *alpha;
      cfg_json["rmax"] = *rmax;
      std::ostringstream csv;
      csv << csv_config_header(cfg_json) << "r,u,du\n";
      for (std::size_t i = 0; i < res.profile.r.size(); ++i)
        csv << fmt(res.profile.r[i]) << "," << fmt(res.profile.u[i]) << ","
            << fmt(res.profile.du[i]) << "\n";
      write_text_file(out_path(opts->out, "shoot.csv"), csv.str());
      write_text_file(out_path(opts->out, "shoot.gp"),
                      gnuplot_script("shoot.csv", 1, 2, "radial profile"));
      const char* cls = res.classification == ShootClass::decaying    ? "decaying"
                        : res.classification == ShootClass::sign_change ? "sign_change"
                                                                        : "grows";
      json rep{{"classification", cls}, {"steps", res.steps}};
      if (res.r_star) rep["r_star"] = *res.r_star;
      if (res.classification == ShootClass::decaying) {
        auto fit = decay_fit(res.profile.r, res.profile.u, *rmax / 5.0, *rmax);
        rep["decay_fit"] = to_json(fit);
        std::cout << "classification=" << cls
                  << " decay_exponent=" << fmt(fit.exponent) << "\n";
      } else if (res.r_star) {
        std::cout << "classification=" << cls << " r_star=" << fmt(*res.r_star) << "\n";
      } else {
        std::cout << "classification=" << cls << "\n";
      }
      write_json_report(out_path(opts->out, "shoot.json"), rep, cfg_json);
    });
  }

  // ---- bubble ----
  {
    auto* sub = app.add_subcommand("bubble", "closed-form profile and residual");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(3.0);
    auto a = std::make_shared<double>(1.0);
    auto rmax = std::make_shared<double>(20.0);
    auto samples = std::make_shared<int>(400);
    auto fd_step = std::make_shared<double>(1e-4);
    sub->add_option("--p", *p)->required();
    sub->add_option("--D", *D)->required();
    sub->add_option("--a", *a, "bubble scale");
    sub->add_option("--rmax", *rmax);
    sub->add_option("--samples", *samples);
    sub->add_option("--fd-step", *fd_step);
    add_common(sub, *opts);
    sub->callback([=]() {
      BubbleParams bp{*a, *p, *D};
      auto prof = sample_bubble(bp, *rmax, *samples);
      std::vector<double> rs;
      for (int i = 1; i < *samples; ++i)
        rs.push_back(0.1 * std::pow(*rmax / 0.1, double(i) / (*samples - 1)));
      auto res = bubble_residual(*p, *D, *a, rs, *fd_step);
      json cfg = common_config(*opts);
      cfg["p"] = *p;
      cfg["D"] = *D;
      cfg["a"] = *a;
      cfg["rmax"] = *rmax;
      cfg["fd_step"] = *fd_step;
      std::ostringstream csv;
      csv << csv_config_header(cfg) << "r,u,du\n";
      for (std::size_t i = 0; i < prof.r.size(); ++i)
        csv << fmt(prof.r[i]) << "," << fmt(prof.u[i]) << "," << fmt(prof.du[i]) << "\n";
      write_text_file(out_path(opts->out, "bubble.csv"), csv.str());
      write_text_file(out_path(opts->out, "bubble.gp"),
                      gnuplot_script("bubble.csv", 1, 2, "bubble profile"));
      write_json_report(out_path(opts->out, "bubble.json"), to_json(res), cfg);
      std::cout << "c_hat=" << fmt(res.c_hat)
                << " max_rel_dev=" << fmt(res.max_rel_dev) << "\n";
    });
  }

  // ---- supersolution ----
  {
    auto* sub = app.add_subcommand("supersolution", "r^{-s} operator identity");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(4.0);
    auto s = std::make_shared<double>(1.0);
    auto rlo = std::make_shared<double>(1.0);
    auto rhi = std::make_shared<double>(10.0);
    auto fd_step = std::make_shared<double>(1e-4);
    sub->add_option("--p", *p)->required();
    sub->add_option("--D", *D)->required();
    sub->add_option("--s", *s)->required();
    sub->add_option("--rlo", *rlo);
    sub->add_option("--rhi", *rhi);
    sub->add_option("--fd-step", *fd_step);
    add_common(sub, *opts);
    sub->callback([=]() {
      std::vector<double> rs;
      for (int i = 0; i < 100; ++i)
        rs.push_back(*rlo * std::pow(*rhi / *rlo, i / 99.0));
      double c2 = supersolution_constant(*p, *D, *s);
      double dev = supersolution_residual(*p, *D, *s, rs, *fd_step);
      json cfg = common_config(*opts);
      cfg["p"] = *p;
      cfg["D"] = *D;
      cfg["s"] = *s;
      cfg["fd_step"] = *fd_step;
      write_json_report(out_path(opts->out, "supersolution.json"),
                        json{{"C2", c2}, {"max_rel_dev", dev}}, cfg);
      std::cout << "C2=" << fmt(c2) << " max_rel_dev=" << fmt(dev) << "\n";
    });
  }

  // ---- solve ----
  {
    auto* sub = app.add_subcommand("solve", "dirichlet solve on a grid");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto weight = std::make_shared<std::string>("constant:1");
    auto dim = std::make_shared<int>(2);
    auto domain = std::make_shared<std::string>("0,1,0,1");
    auto nodes = std::make_shared<std::string>("33,33");
    auto bc = std::make_shared<std::string>("const:0");
    auto f = std::make_shared<std::string>("const:0");
    auto free_faces = std::make_shared<std::string>("");
    auto solver_rel_tol = std::make_shared<double>(1e-12);
    auto residual_tol = std::make_shared<double>(0.0);
    auto max_sweeps = std::make_shared<int>(200000);
    sub->add_option("--p", *p)->required();
    sub->add_option("--weight", *weight);
    sub->add_option("--dim", *dim, "1 or 2");
    sub->add_option("--domain", *domain, "x0,x1[,y0,y1]");
    sub->add_option("--nodes", *nodes, "nx[,ny]");
    sub->add_option("--bc", *bc, "const:v | linear:a,b,c | rpow:[c,]e | sinmix:c,a,b");
    sub->add_option("--f", *f, "right-hand side, same forms");
    sub->add_option("--free-faces", *free_faces, "comma list of x_lo,x_hi,y_lo,y_hi");
    sub->add_option("--solver-rel-tol", *solver_rel_tol);
    sub->add_option("--residual-tol", *residual_tol);
    sub->add_option("--max-sweeps", *max_sweeps);
    add_common(sub, *opts);
    sub->callback([=]() {
      auto dom = parse_list(*domain);
      auto nn = parse_list(*nodes);
      WeightSpec w = weight_from_compact(*weight, *dim);
      Grid g0;
      if (*dim == 1) {
        if (dom.size() != 2 || nn.size() != 1)
          throw CLI::ValidationError("--domain/--nodes", "1-D wants x0,x1 and nx");
        int nx = static_cast<int>(nn[0]);
        g0 = make_grid_1d(dom[0], (dom[1] - dom[0]) / (nx - 1), nx);
      } else {
        if (dom.size() != 4 || nn.size() != 2)
          throw CLI::ValidationError("--domain/--nodes", "2-D wants x0,x1,y0,y1 and nx,ny");
        int nx = static_cast<int>(nn[0]);
        g0 = make_grid_2d(dom[0], dom[2], (dom[1] - dom[0]) / (nx - 1), nx,
                          static_cast<int>(nn[1]));
      }
      if (!free_faces->empty()) {
        std::stringstream ss(*free_faces);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (item == "x_lo") set_face_free(g0, Face::x_lo);
          else if (item == "x_hi") set_face_free(g0, Face::x_hi);
          else if (item == "y_lo") set_face_free(g0, Face::y_lo);
          else if (item == "y_hi") set_face_free(g0, Face::y_hi);
          else throw CLI::ValidationError("--free-faces", "unknown face " + item);
        }
      }
      auto g = std::make_shared<const Grid>(std::move(g0));
      Field bc_field = make_field(g, parse_scalar_fn(*bc));
      Field f_field = make_field(g, parse_scalar_fn(*f));
      SolveConfig scfg;
      scfg.rel_tol = *solver_rel_tol;
      scfg.residual_tol = *residual_tol;
      scfg.max_sweeps = *max_sweeps;
      auto res = solve_dirichlet(w, *p, f_field, bc_field, scfg);
      json cfg = common_config(*opts);
      cfg["p"] = *p;
      cfg["weight"] = *weight;
      cfg["domain"] = *domain;
      cfg["nodes"] = *nodes;
      cfg["bc"] = *bc;
      cfg["f"] = *f;
      std::ostringstream snap;
      write_field(snap, res.field, *p, w);
      write_text_file(out_path(opts->out, "solve.field"), snap.str());
      std::ostringstream csv;
      csv << csv_config_header(cfg);
      write_field_csv(csv, res.field);
      write_text_file(out_path(opts->out, "solve.csv"), csv.str());
      write_text_file(out_path(opts->out, "solve.gp"),
                      *dim == 1
                          ? gnuplot_script("solve.csv", 1, 2, "solution")
                          : std::string("set datafile separator ','\n"
                                        "set view map\nsplot 'solve.csv' using "
                                        "1:2:3 with points palette notitle\n"));
      write_json_report(out_path(opts->out, "solve.json"),
                        json{{"converged", res.converged},
                             {"sweeps", res.sweeps},
                             {"energy", res.energy},
                             {"residual_max", res.residual_max}},
                        cfg);
      std::cout << (res.converged ? "converged" : "not converged")
                << " sweeps=" << res.sweeps
                << " energy=" << fmt(res.energy)
                << " residual=" << fmt(res.residual_max) << "\n";
      if (!res.converged) std::exit(1);
    });
  }

  // ---- compare ----
  {
    auto* sub = app.add_subcommand("compare", "discrete comparison probe");
    auto opts = std::make_shared<CommonOpts>();
    auto u_file = std::make_shared<std::string>();
    auto v_file = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(1e-8);
    sub->add_option("--u", *u_file, "field snapshot")->required();
    sub->add_option("--v", *v_file, "field snapshot")->required();
    sub->add_option("--tol", *tol);
    add_common(sub, *opts);
    sub->callback([=]() {
      std::ifstream us(*u_file), vs(*v_file);
      if (!us || !vs) throw CLI::ValidationError("--u/--v", "cannot open snapshot");
      auto u = read_field(us);
      auto v = read_field(vs);
      auto rep = comparison_check(u.weight, u.p, u.field, v.field, *tol);
      json cfg = common_config(*opts);
      cfg["u"] = *u_file;
      cfg["v"] = *v_file;
      cfg["tol"] = *tol;
      write_json_report(out_path(opts->out, "compare.json"),
                        json{{"hypotheses_met", rep.hypotheses_met},
                             {"holds", rep.holds},
                             {"worst_violation", rep.worst_violation},
                             {"worst_node", rep.worst_node},
                             {"detail", rep.detail}},
                        cfg);
      if (!rep.hypotheses_met)
        std::cout << rep.detail << " node=" << rep.offending_node << "\n";
      else
        std::cout << (rep.holds ? "holds" : "violated")
                  << " worst=" << fmt(rep.worst_violation) << "\n";
    });
  }

  // ---- moser ----
  {
    auto* sub = app.add_subcommand("moser", "iteration ledger for the bubble");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(4.0);
    auto a = std::make_shared<double>(1.0);
    auto base = std::make_shared<double>(2.0);
    auto k = std::make_shared<double>(0.0);
    auto samples = std::make_shared<int>(20000);
    sub->add_option("--p", *p)->required();
    sub->add_option("--D", *D)->required();
    sub->add_option("--a", *a);
    sub->add_option("--base", *base);
    sub->add_option("--k", *k);
    sub->add_option("--samples", *samples);
    add_common(sub, *opts);
    sub->callback([=]() {
      BubbleParams bp{*a, *p, *D};
      auto fine = sample_bubble(bp, *base * 1.01, *samples);
      auto coarse = sample_bubble(bp, *base * 1.01, *samples / 2);
      auto led = moser_ledger([&](double r) { return fine.interp(r); },
                              [&](double r) { return coarse.interp(r); }, *p, *D,
                              *base, *k);
      json cfg = common_config(*opts);
      cfg["p"] = *p;
      cfg["D"] = *D;
      cfg["a"] = *a;
      cfg["base"] = *base;
      cfg["k"] = *k;
      std::ostringstream csv;
      csv << csv_config_header(cfg) << "n,s,h,psi\n";
      for (const auto& row : led.rows)
        csv << row.n << "," << fmt(row.s) << "," << fmt(row.h) << ","
            << fmt(row.psi) << "\n";
      write_text_file(out_path(opts->out, "moser.csv"), csv.str());
      write_text_file(out_path(opts->out, "moser.gp"),
                      gnuplot_script("moser.csv", 2, 4, "Moser ledger", true));
      write_json_report(out_path(opts->out, "moser.json"), to_json(led), cfg);
      std::cout << "rows=" << led.rows.size()
                << " final_psi=" << fmt(led.rows.back().psi)
                << " sup_B1=" << fmt(led.sup_inner)
                << " C_meas=" << fmt(led.c_meas) << "\n";
    });
  }

  // ---- harnack ----
  {
    auto* sub = app.add_subcommand("harnack", "max/min probe on a field");
    auto opts = std::make_shared<CommonOpts>();
    auto field_file = std::make_shared<std::string>();
    auto center = std::make_shared<std::string>("0,0");
    auto R = std::make_shared<double>(1.0);
    auto k = std::make_shared<double>(0.0);
    sub->add_option("--field", *field_file)->required();
    sub->add_option("--center", *center);
    sub->add_option("--R", *R);
    sub->add_option("--k", *k);
    add_common(sub, *opts);
    sub->callback([=]() {
      std::ifstream fs_in(*field_file);
      if (!fs_in) throw CLI::ValidationError("--field", "cannot open snapshot");
      auto snap = read_field(fs_in);
      auto rep = harnack_report(snap.field, parse_list(*center), *R, *k);
      json cfg = common_config(*opts);
      cfg["field"] = *field_file;
      cfg["center"] = *center;
      cfg["R"] = *R;
      cfg["k"] = *k;
      write_json_report(out_path(opts->out, "harnack.json"), to_json(rep), cfg);
      std::cout << "C_meas=" << fmt(rep.c_meas) << " max=" << fmt(rep.max_value)
                << " min=" << fmt(rep.min_value) << "\n";
    });
  }

  // ---- oscillation ----
  {
    auto* sub = app.add_subcommand("oscillation", "oscillation decay over shrinking balls");
    auto opts = std::make_shared<CommonOpts>();
    auto field_file = std::make_shared<std::string>();
    auto x0 = std::make_shared<std::string>("0,0");
    auto r0 = std::make_shared<double>(1.0);
    auto levels = std::make_shared<int>(4);
    auto eps = std::make_shared<double>(0.5);
    auto p = std::make_shared<double>(2.0);
    sub->add_option("--field", *field_file)->required();
    sub->add_option("--x0", *x0);
    sub->add_option("--r0", *r0);
    sub->add_option("--levels", *levels);
    sub->add_option("--eps", *eps);
    sub->add_option("--p", *p);
    add_common(sub, *opts);
    sub->callback([=]() {
      std::ifstream fs_in(*field_file);
      if (!fs_in) throw CLI::ValidationError("--field", "cannot open snapshot");
      auto snap = read_field(fs_in);
      auto rep = oscillation_report(snap.field, parse_list(*x0), *r0, *levels, *eps, *p);
      json cfg = common_config(*opts);
      cfg["field"] = *field_file;
      cfg["x0"] = *x0;
      cfg["r0"] = *r0;
      cfg["levels"] = *levels;
      write_json_report(out_path(opts->out, "oscillation.json"), to_json(rep), cfg);
      std::ostringstream csv;
      csv << csv_config_header(cfg) << "r,omega\n";
      for (std::size_t i = 0; i < rep.radii.size(); ++i)
        csv << fmt(rep.radii[i]) << "," << fmt(rep.omega[i]) << "\n";
      write_text_file(out_path(opts->out, "oscillation.csv"), csv.str());
      write_text_file(out_path(opts->out, "oscillation.gp"),
                      gnuplot_script("oscillation.csv", 1, 2, "oscillation", true));
      std::cout << "theta_fit=" << fmt(rep.theta_fit)
                << " holder=" << fmt(rep.holder_exponent) << "\n";
    });
  }

  // ---- bmo ----
  {
    auto* sub = app.add_subcommand("bmo", "BMO seminorm over dyadic balls");
    auto opts = std::make_shared<CommonOpts>();
    auto fn = std::make_shared<std::string>("log-inv");
    auto D = std::make_shared<double>(2.0);
    auto scales = std::make_shared<int>(6);
    sub->add_option("--fn", *fn, "log-inv | inv-r");
    sub->add_option("--D", *D, "effective dimension");
    sub->add_option("--scales", *scales, "dyadic levels 2^0 .. 2^{-k+1}");
    add_common(sub, *opts);
    sub->callback([=]() {
      RadialFn v;
      if (*fn == "log-inv")
        v = [](double r) { return -std::log(std::max(r, 1e-300)); };
      else if (*fn == "inv-r")
        v = [](double r) { return 1.0 / std::max(r, 1e-300); };
      else
        throw CLI::ValidationError("--fn", "unknown function " + *fn);
      std::vector<double> radii;
      for (int j = 0; j < *scales; ++j) radii.push_back(std::pow(2.0, -j));
      double sup = bmo_seminorm_radial(v, *D, radii);
      json cfg = common_config(*opts);
      cfg["fn"] = *fn;
      cfg["D"] = *D;
      cfg["scales"] = *scales;
      write_json_report(out_path(opts->out, "bmo.json"),
                        json{{"seminorm", sup}, {"radii", radii}}, cfg);
      std::cout << "bmo=" << fmt(sup) << "\n";
    });
  }

  // ---- tail ----
  {
    auto* sub = app.add_subcommand("tail", "tail-mass recursion f(2R)/f(R)");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(4.0);
    auto a = std::make_shared<double>(1.0);
    auto power = std::make_shared<double>(0.0);
    auto R_list = std::make_shared<std::string>("4,8,16,32");
    auto rmax = std::make_shared<double>(4000.0);
    sub->add_option("--p", *p);
    sub->add_option("--D", *D)->required();
    sub->add_option("--a", *a, "bubble scale (when --power is absent)");
    sub->add_option("--power", *power, "use u = r^{-m} instead of the bubble");
    sub->add_option("--R-list", *R_list);
    sub->add_option("--rmax", *rmax);
    add_common(sub, *opts);
    sub->callback([=]() {
      double q = *D * *p / (*D - *p);
      RadialFn u;
      if (*power > 0.0) {
        double m = *power;
        u = [m](double r) { return std::pow(std::max(r, 1e-300), -m); };
      } else {
        BubbleParams bp{*a, *p, *D};
        u = [bp](double r) { return bubble_value(bp, r); };
      }
      auto Rs = parse_list(*R_list);
      auto rep = tail_decay_radial(u, *D, q, Rs, *rmax);
      json cfg = common_config(*opts);
      cfg["p"] = *p;
      cfg["D"] = *D;
      cfg["q"] = q;
      cfg["R_list"] = *R_list;
      cfg["rmax"] = *rmax;
      std::ostringstream csv;
      csv << csv_config_header(cfg) << "R,f\n";
      for (std::size_t i = 0; i < rep.R_list.size(); ++i)
        csv << fmt(rep.R_list[i]) << "," << fmt(rep.f[i]) << "\n";
      write_text_file(out_path(opts->out, "tail.csv"), csv.str());
      write_text_file(out_path(opts->out, "tail.gp"),
                      gnuplot_script("tail.csv", 1, 2, "tail masses", true));
      write_json_report(out_path(opts->out, "tail.json"), to_json(rep), cfg);
      std::cout << "theta_hat=" << fmt(rep.theta_hat)
                << " tau_hat=" << fmt(rep.tau_hat) << "\n";
    });
  }

  // ---- decay ----
  {
    auto* sub = app.add_subcommand("decay", "tail decay exponent fit");
    auto opts = std::make_shared<CommonOpts>();
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(4.0);
    auto a = std::make_shared<double>(1.0);
    auto window = std::make_shared<std::string>("10,100");
    sub->add_option("--p", *p)->required();
    sub->add_option("--D", *D)->required();
    sub->add_option("--a", *a);
    sub->add_option("--window", *window, "fit window lo,hi");
    add_common(sub, *opts);
    sub->callback([=]() {
      auto win = parse_list(*window);
      if (win.size() != 2) throw CLI::ValidationError("--window", "wants lo,hi");
      BubbleParams bp{*a, *p, *D};
      std::vector<double> rs, us;
      for (int i = 0; i < 400; ++i) {
        double r = win[0] * std::pow(win[1] / win[0], i / 399.0);
        rs.push_back(r);
        us.push_back(bubble_value(bp, r));
      }
      auto fit = decay_fit(rs, us, win[0], win[1]);
      auto chk = decay_rate_check(rs, us, *p, *D, win[0]);
      json cfg = common_config(*opts);
      cfg["p"] = *p;
      cfg["D"] = *D;
      cfg["a"] = *a;
      cfg["window"] = *window;
      write_json_report(out_path(opts->out, "decay.json"),
                        json{{"fit", to_json(fit)}, {"check", to_json(chk)}}, cfg);
      std::cout << "exponent=" << fmt(fit.exponent)
                << " lambda_hat=" << fmt(chk.lambda_hat) << "\n";
    });
  }

  // ---- chain ----
  {
    auto* sub = app.add_subcommand("chain", "exponent relation for (r, t)");
    auto opts = std::make_shared<CommonOpts>();
    auto r = std::make_shared<double>(0.0);
    auto t = std::make_shared<double>(0.0);
    auto p = std::make_shared<double>(2.0);
    auto D = std::make_shared<double>(4.0);
    sub->add_option("--r", *r)->required();
    sub->add_option("--t", *t)->required();
    sub->add_option("--p", *p)->required();
    sub->add_option("--D", *D)->required();
    add_common(sub, *opts);
    sub->callback([=]() {
      auto rep = exponent_chain(*r, *t, *p, *D);
      json cfg = common_config(*opts);
      cfg["r"] = *r;
      cfg["t"] = *t;
      cfg["p"] = *p;
      cfg["D"] = *D;
      write_json_report(out_path(opts->out, "chain.json"), to_json(rep), cfg);
      std::cout << "s=" << fmt(rep.s) << "\n";
    });
  }

  try {
    std::vector<std::string> args = merge_config_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;  // --help and friends
    }
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const QuadratureFailure& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const StiffFailure& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
