#include "wplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace wplab {

Grid make_grid_1d(double x0, double h, int nx) {
  Grid g;
  g.n = 1;
  g.origin = {x0, 0.0};
  g.h = h;
  g.dims = {nx, 1};
  g.mask.assign(static_cast<std::size_t>(nx), NodeKind::interior);
  g.mask.front() = NodeKind::dirichlet;
  g.mask.back() = NodeKind::dirichlet;
  validate_grid(g);
  return g;
}

Grid make_grid_2d(double x0, double y0, double h, int nx, int ny) {
  Grid g;
  g.n = 2;
  g.origin = {x0, y0};
  g.h = h;
  g.dims = {nx, ny};
  g.mask.assign(static_cast<std::size_t>(nx) * ny, NodeKind::interior);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (g.on_boundary(i, j)) g.mask[g.index(i, j)] = NodeKind::dirichlet;
  validate_grid(g);
  return g;
}

void set_face_free(Grid& g, Face face) {
  auto mark = [&](int i, int j) { g.mask[g.index(i, j)] = NodeKind::free_flux; };
  const int lo = g.n == 2 ? 1 : 0;  // corners stay dirichlet in 2-D
  switch (face) {
    case Face::x_lo:
      for (int j = lo; j < g.dims[1] - lo; ++j) mark(0, j);
      break;
    case Face::x_hi:
      for (int j = lo; j < g.dims[1] - lo; ++j) mark(g.dims[0] - 1, j);
      break;
    case Face::y_lo:
      for (int i = 1; i + 1 < g.dims[0]; ++i) mark(i, 0);
      break;
    case Face::y_hi:
      for (int i = 1; i + 1 < g.dims[0]; ++i) mark(i, g.dims[1] - 1);
      break;
  }
  if (std::find(g.free_faces.begin(), g.free_faces.end(), face) ==
      g.free_faces.end())
    g.free_faces.push_back(face);
}

void validate_grid(const Grid& g) {
  if (g.n != 1 && g.n != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (g.dims[0] < 3 || (g.n == 2 && g.dims[1] < 3) || (g.n == 1 && g.dims[1] != 1))
    throw std::invalid_argument("grid needs >= 3 nodes per axis");
  if (!(g.h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (static_cast<int>(g.mask.size()) != g.node_count())
    throw std::invalid_argument("mask size mismatch");
  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i) {
      NodeKind k = g.mask[g.index(i, j)];
      if (g.on_boundary(i, j)) {
        if (k == NodeKind::interior)
          throw std::invalid_argument("box boundary nodes must be dirichlet or free");
      } else if (k == NodeKind::free_flux) {
        throw std::invalid_argument("free nodes are only legal on boundary faces");
      }
    }
}

Field make_field(std::shared_ptr<const Grid> grid, double fill) {
  Field f;
  f.grid = std::move(grid);
  f.values.assign(static_cast<std::size_t>(f.grid->node_count()), fill);
  return f;
}

Field make_field(std::shared_ptr<const Grid> grid,
                 const std::function<double(double, double)>& fn) {
  Field f = make_field(grid);
  const Grid& g = *f.grid;
  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i)
      f.values[g.index(i, j)] = fn(g.x_of(i), g.n == 2 ? g.y_of(j) : 0.0);
  return f;
}

namespace {

struct Workspace {
  const Grid* g = nullptr;
  double p = 2.0;
  double eps2 = 0.0;
  double cell_measure = 0.0;          // h^n
  std::vector<double> cell_w;          // weight at cell midpoints
  std::vector<double> node_fw;         // f * w at nodes
  int ncx = 0, ncy = 0;               // cells per axis

  int cell_index(int ci, int cj) const { return cj * ncx + ci; }
};

Workspace make_workspace(const WeightSpec& w, double p, const Field& f,
                         double eps) {
  Workspace ws;
  const Grid& g = *f.grid;
  ws.g = &g;
  ws.p = p;
  ws.eps2 = eps * eps;
  ws.cell_measure = g.n == 1 ? g.h : g.h * g.h;
  ws.ncx = g.dims[0] - 1;
  ws.ncy = g.n == 2 ? g.dims[1] - 1 : 1;
  ws.cell_w.resize(static_cast<std::size_t>(ws.ncx) * ws.ncy);
  std::array<double, 2> x{};
  for (int cj = 0; cj < ws.ncy; ++cj)
    for (int ci = 0; ci < ws.ncx; ++ci) {
      x[0] = g.x_of(ci) + 0.5 * g.h;
      x[1] = g.n == 2 ? g.y_of(cj) + 0.5 * g.h : 0.0;
      ws.cell_w[ws.cell_index(ci, cj)] =
          w.eval(std::span<const double>(x.data(), g.n));
    }
  ws.node_fw.resize(static_cast<std::size_t>(g.node_count()));
  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i) {
      x[0] = g.x_of(i);
      x[1] = g.n == 2 ? g.y_of(j) : 0.0;
      ws.node_fw[g.index(i, j)] =
          f.values[g.index(i, j)] * w.eval(std::span<const double>(x.data(), g.n));
    }
  return ws;
}

double cell_energy_density(const Workspace& ws, const std::vector<double>& u,
                           int ci, int cj) {
  const Grid& g = *ws.g;
  if (g.n == 1) {
    double gx = (u[ci + 1] - u[ci]) / g.h;
    return std::pow(gx * gx + ws.eps2, 0.5 * ws.p) / ws.p;
  }
  int i00 = g.index(ci, cj), i10 = g.index(ci + 1, cj);
  int i01 = g.index(ci, cj + 1), i11 = g.index(ci + 1, cj + 1);
  double gx = (u[i10] - u[i00] + u[i11] - u[i01]) / (2.0 * g.h);
  double gy = (u[i01] - u[i00] + u[i11] - u[i10]) / (2.0 * g.h);
  return std::pow(gx * gx + gy * gy + ws.eps2, 0.5 * ws.p) / ws.p;
}

double total_energy(const Workspace& ws, const std::vector<double>& u) {
  double acc = 0.0;
  for (int cj = 0; cj < ws.ncy; ++cj)
    for (int ci = 0; ci < ws.ncx; ++ci)
      acc += ws.cell_w[ws.cell_index(ci, cj)] * cell_energy_density(ws, u, ci, cj);
  double src = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) src += ws.node_fw[i] * u[i];
  return (acc - src) * ws.cell_measure;
}

// dE/du at one node, as a function of a trial value v placed at that node.
double node_energy_derivative(const Workspace& ws, std::vector<double>& u,
                              int i, int j, double v) {
  const Grid& g = *ws.g;
  const int idx = g.index(i, j);
  const double saved = u[idx];
  u[idx] = v;
  double acc = 0.0;
  if (g.n == 1) {
    for (int ci = std::max(0, i - 1); ci <= std::min(ws.ncx - 1, i); ++ci) {
      double gx = (u[ci + 1] - u[ci]) / g.h;
      double dgx = (ci == i - 1 ? 1.0 : -1.0) / g.h;
      double np = gx * gx + ws.eps2;
      acc += ws.cell_w[ci] * std::pow(np, 0.5 * (ws.p - 2.0)) * gx * dgx;
    }
  } else {
    for (int cj = std::max(0, j - 1); cj <= std::min(ws.ncy - 1, j); ++cj)
      for (int ci = std::max(0, i - 1); ci <= std::min(ws.ncx - 1, i); ++ci) {
        int i00 = g.index(ci, cj), i10 = g.index(ci + 1, cj);
        int i01 = g.index(ci, cj + 1), i11 = g.index(ci + 1, cj + 1);
        double gx = (u[i10] - u[i00] + u[i11] - u[i01]) / (2.0 * g.h);
        double gy = (u[i01] - u[i00] + u[i11] - u[i10]) / (2.0 * g.h);
        double sx = (i == ci + 1) ? 1.0 : -1.0;
        double sy = (j == cj + 1) ? 1.0 : -1.0;
        double dgx = sx / (2.0 * g.h);
        double dgy = sy / (2.0 * g.h);
        double np = gx * gx + gy * gy + ws.eps2;
        double scale = np == 0.0 && ws.p < 2.0 ? 0.0 : std::pow(np, 0.5 * (ws.p - 2.0));
        acc += ws.cell_w[ws.cell_index(ci, cj)] * scale * (gx * dgx + gy * dgy);
      }
  }
  u[idx] = saved;
  return acc - ws.node_fw[idx];
}

// Root of the monotone nodal derivative: bracket expansion plus Illinois.
double local_minimize(const Workspace& ws, std::vector<double>& u, int i, int j) {
  const double v0 = u[ws.g->index(i, j)];
  double f0 = node_energy_derivative(ws, u, i, j, v0);
  if (f0 == 0.0) return v0;
  double step = std::max({std::abs(v0) * 0.25, ws.g->h, 1e-8});
  double a = v0, b = v0, fa = f0, fb = f0;
  if (f0 > 0.0) {
    for (int k = 0; k < 80 && fa > 0.0; ++k) {
      b = a; fb = fa;
      a -= step;
      step *= 2.0;
      fa = node_energy_derivative(ws, u, i, j, a);
    }
    if (fa > 0.0) return v0;
  } else {
    for (int k = 0; k < 80 && fb < 0.0; ++k) {
      a = b; fa = fb;
      b += step;
      step *= 2.0;
      fb = node_energy_derivative(ws, u, i, j, b);
    }
    if (fb < 0.0) return v0;
  }
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double tol = 1e-14 * (1.0 + std::abs(a) + std::abs(b));
    if (b - a <= tol) break;
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    double fc = node_energy_derivative(ws, u, i, j, c);
    if (fc == 0.0) return c;
    if ((fc < 0.0) == (fa < 0.0)) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (a + b);
}

// Exact nodal update for p = 2: the derivative is affine in the trial value.
double local_solve_linear(const Workspace& ws, std::vector<double>& u, int i, int j) {
  const double v0 = u[ws.g->index(i, j)];
  double f0 = node_energy_derivative(ws, u, i, j, v0);
  double f1 = node_energy_derivative(ws, u, i, j, v0 + 1.0);
  double slope = f1 - f0;
  if (slope <= 0.0) return v0;
  return v0 - f0 / slope;
}

}  // namespace

double energy(const WeightSpec& w, double p, const Field& u, const Field& f) {
  if (u.grid != f.grid && u.grid->node_count() != f.grid->node_count())
    throw std::invalid_argument("fields must share the grid");
  Workspace ws = make_workspace(w, p, f, 0.0);
  return total_energy(ws, u.values);
}

SolveResult solve_dirichlet(const WeightSpec& w, double p, const Field& f,
                            const Field& boundary, const SolveConfig& cfg,
                            const std::optional<Field>& initial) {
  const Grid& g = *boundary.grid;
  validate_grid(g);
  Workspace ws = make_workspace(w, p, f, cfg.eps);

  SolveResult res;
  res.field = boundary;
  std::vector<double>& u = res.field.values;

  // initial iterate: caller-provided, else dirichlet mean on unknowns
  if (initial) {
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i)
        if (g.mask[g.index(i, j)] != NodeKind::dirichlet)
          u[g.index(i, j)] = initial->values[g.index(i, j)];
  } else {
    double mean = 0.0;
    int nd = 0;
    for (int k = 0; k < g.node_count(); ++k)
      if (g.mask[k] == NodeKind::dirichlet) {
        mean += u[k];
        ++nd;
      }
    mean = nd > 0 ? mean / nd : 0.0;
    for (int k = 0; k < g.node_count(); ++k)
      if (g.mask[k] != NodeKind::dirichlet) u[k] = mean;
  }

  double omega = cfg.relaxation;
  if (omega <= 0.0)
    omega = p == 2.0 ? 2.0 / (1.0 + std::sin(M_PI / std::max(g.dims[0], g.dims[1])))
                     : 1.0;

  double e_prev = total_energy(ws, u);
  double e_first = e_prev;
  if (cfg.record_energy_trace) res.energy_trace.push_back(e_prev);

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color) {
      for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i) {
          if (((i + j) & 1) != color) continue;
          int idx = g.index(i, j);
          if (g.mask[idx] == NodeKind::dirichlet) continue;
          double v_star = p == 2.0 ? local_solve_linear(ws, u, i, j)
                                   : local_minimize(ws, u, i, j);
          u[idx] += omega * (v_star - u[idx]);
        }
    }
    double e_cur = total_energy(ws, u);
    if (cfg.record_energy_trace) res.energy_trace.push_back(e_cur);
    double scale = std::max({std::abs(e_cur), e_first - e_cur, 1.0e-300});
    if (e_cur > e_prev + 1e-11 * (std::abs(e_prev) + 1.0))
      throw std::logic_error("energy increased across a sweep");
    res.sweeps = sweep;
    res.energy = e_cur;
    if (e_prev - e_cur <= cfg.rel_tol * scale) {
      bool done = true;
      if (cfg.residual_tol > 0.0) {
        double rmax = 0.0;
        for (int j = 0; j < g.dims[1]; ++j)
          for (int i = 0; i < g.dims[0]; ++i) {
            int idx = g.index(i, j);
            if (g.mask[idx] == NodeKind::dirichlet) continue;
            rmax = std::max(rmax, std::abs(node_energy_derivative(ws, u, i, j, u[idx])));
          }
        done = rmax < cfg.residual_tol;
      }
      if (done) {
        res.converged = true;
        break;
      }
    }
    e_prev = e_cur;
  }

  Field r = residual(w, p, res.field, f);
  for (double v : r.values) res.residual_max = std::max(res.residual_max, std::abs(v));
  return res;
}

Field residual(const WeightSpec& w, double p, const Field& u, const Field& f) {
  const Grid& g = *u.grid;
  Workspace ws = make_workspace(w, p, f, 0.0);
  Field out = make_field(u.grid);
  std::vector<double> work = u.values;
  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i) {
      int idx = g.index(i, j);
      if (g.mask[idx] == NodeKind::dirichlet) {
        out.values[idx] = 0.0;
        continue;
      }
      // the nodal derivative already carries the 1/h^n normalization:
      // sum_cells w_c |g|^{p-2} g . dg  -  f w
      out.values[idx] = node_energy_derivative(ws, work, i, j, work[idx]);
    }
  return out;
}

Field prolong(const Field& coarse, std::shared_ptr<const Grid> fine) {
  const Grid& gc = *coarse.grid;
  const Grid& gf = *fine;
  Field out = make_field(fine);
  for (int j = 0; j < gf.dims[1]; ++j)
    for (int i = 0; i < gf.dims[0]; ++i) {
      double x = gf.x_of(i);
      double y = gf.n == 2 ? gf.y_of(j) : 0.0;
      double s = (x - gc.origin[0]) / gc.h;
      double t = gc.n == 2 ? (y - gc.origin[1]) / gc.h : 0.0;
      int ci = std::clamp(static_cast<int>(std::floor(s)), 0, gc.dims[0] - 2);
      int cj = gc.n == 2 ? std::clamp(static_cast<int>(std::floor(t)), 0, gc.dims[1] - 2) : 0;
      double fs = std::clamp(s - ci, 0.0, 1.0);
      double ft = gc.n == 2 ? std::clamp(t - cj, 0.0, 1.0) : 0.0;
      if (gc.n == 1) {
        out.values[gf.index(i, j)] =
            (1.0 - fs) * coarse.values[gc.index(ci, 0)] +
            fs * coarse.values[gc.index(ci + 1, 0)];
      } else {
        out.values[gf.index(i, j)] =
            (1.0 - fs) * (1.0 - ft) * coarse.values[gc.index(ci, cj)] +
            fs * (1.0 - ft) * coarse.values[gc.index(ci + 1, cj)] +
            (1.0 - fs) * ft * coarse.values[gc.index(ci, cj + 1)] +
            fs * ft * coarse.values[gc.index(ci + 1, cj + 1)];
      }
    }
  return out;
}

ComparisonReport comparison_check(const WeightSpec& w, double p, const Field& u,
                                  const Field& v, double comparison_tol) {
  const Grid& g = *u.grid;
  if (v.grid->node_count() != g.node_count())
    throw std::invalid_argument("fields must share the grid");
  ComparisonReport rep;

  Field zero = make_field(u.grid);
  Field lu = residual(w, p, u, zero);
  Field lv = residual(w, p, v, zero);

  for (int k = 0; k < g.node_count(); ++k) {
    if (g.mask[k] == NodeKind::dirichlet) {
      if (u.values[k] > v.values[k] + comparison_tol) {
        rep.hypotheses_met = false;
        rep.detail = "hypotheses not met: u > v on dirichlet node";
        rep.offending_node = k;
        break;
      }
    } else {
      double tol = comparison_tol * std::max({1.0, std::abs(lu.values[k]),
                                              std::abs(lv.values[k])});
      if (lu.values[k] > lv.values[k] + tol) {
        rep.hypotheses_met = false;
        rep.detail = "hypotheses not met: residual(u) > residual(v) at node";
        rep.offending_node = k;
        break;
      }
    }
  }

  rep.worst_violation = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.node_count(); ++k) {
    if (g.mask[k] == NodeKind::dirichlet) continue;
    double viol = u.values[k] - v.values[k];
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.worst_node = k;
    }
  }
  if (rep.worst_violation == -std::numeric_limits<double>::infinity())
    rep.worst_violation = 0.0;
  rep.holds = rep.hypotheses_met && rep.worst_violation <= comparison_tol;
  return rep;
}

void write_field(std::ostream& os, const Field& u, double p, const WeightSpec& w) {
  const Grid& g = *u.grid;
  os.precision(17);
  os << "# wplab field v1\n";
  os << "n=" << g.n << "\n";
  os << "dims=" << g.dims[0] << "," << g.dims[1] << "\n";
  os << "origin=" << g.origin[0] << "," << g.origin[1] << "\n";
  os << "h=" << g.h << "\n";
  os << "p=" << p << "\n";
  os << "weight=" << w.compact() << "\n";
  os << "free_faces=";
  for (std::size_t i = 0; i < g.free_faces.size(); ++i) {
    if (i) os << ",";
    switch (g.free_faces[i]) {
      case Face::x_lo: os << "x_lo"; break;
      case Face::x_hi: os << "x_hi"; break;
      case Face::y_lo: os << "y_lo"; break;
      case Face::y_hi: os << "y_hi"; break;
    }
  }
  os << "\nvalues:\n";
  for (double v : u.values) os << v << "\n";
}

FieldSnapshot read_field(std::istream& is) {
  std::string line;
  int n = 2, nx = 0, ny = 1;
  double ox = 0.0, oy = 0.0, h = 1.0, p = 2.0;
  std::string weight_str = "constant:1";
  std::vector<std::string> faces;
  while (std::getline(is, line)) {
    if (line == "values:") break;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    std::stringstream vs(val);
    if (key == "n") n = std::stoi(val);
    else if (key == "dims") { char c; vs >> nx >> c >> ny; }
    else if (key == "origin") { char c; vs >> ox >> c >> oy; }
    else if (key == "h") h = std::stod(val);
    else if (key == "p") p = std::stod(val);
    else if (key == "weight") weight_str = val;
    else if (key == "free_faces" && !val.empty()) {
      std::string item;
      while (std::getline(vs, item, ',')) faces.push_back(item);
    }
  }
  Grid g = n == 1 ? make_grid_1d(ox, h, nx) : make_grid_2d(ox, oy, h, nx, ny);
  for (const auto& f : faces) {
    if (f == "x_lo") set_face_free(g, Face::x_lo);
    else if (f == "x_hi") set_face_free(g, Face::x_hi);
    else if (f == "y_lo") set_face_free(g, Face::y_lo);
    else if (f == "y_hi") set_face_free(g, Face::y_hi);
  }
  FieldSnapshot snap{make_field(std::make_shared<Grid>(std::move(g))), p,
                     weight_from_compact(weight_str, n)};
  for (double& v : snap.field.values) {
    if (!(is >> v)) throw std::runtime_error("field snapshot truncated");
  }
  return snap;
}

void write_field_csv(std::ostream& os, const Field& u) {
  const Grid& g = *u.grid;
  os.precision(17);
  os << (g.n == 1 ? "x,u\n" : "x,y,u\n");
  for (int j = 0; j < g.dims[1]; ++j)
    for (int i = 0; i < g.dims[0]; ++i) {
      if (g.n == 1)
        os << g.x_of(i) << "," << u.values[g.index(i, j)] << "\n";
      else
        os << g.x_of(i) << "," << g.y_of(j) << "," << u.values[g.index(i, j)] << "\n";
    }
}

}  // namespace wplab
