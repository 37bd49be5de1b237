#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wplab/geometry.hpp"
#include "wplab/weight.hpp"

namespace wplab {

enum class NodeKind : unsigned char { interior, dirichlet, free_flux };

enum class Face { x_lo, x_hi, y_lo, y_hi };

/// Uniform rectangular grid, N in {1,2}. Box boundary nodes are dirichlet by
/// default; whole faces may be marked free (zero-flux, the Gamma_2 case).
struct Grid {
  int n = 2;                      // spatial dimension
  std::array<double, 2> origin{}; // coordinates of node (0,0)
  double h = 1.0;
  std::array<int, 2> dims{3, 3};  // nodes per axis (dims[1] == 1 in 1-D)
  std::vector<NodeKind> mask;     // row-major: index = j*dims[0] + i
  std::vector<Face> free_faces;

  int node_count() const { return dims[0] * dims[1]; }
  int index(int i, int j) const { return j * dims[0] + i; }
  double x_of(int i) const { return origin[0] + h * i; }
  double y_of(int j) const { return origin[1] + h * j; }
  bool on_boundary(int i, int j) const {
    return i == 0 || i == dims[0] - 1 ||
           (n == 2 && (j == 0 || j == dims[1] - 1));
  }
};

Grid make_grid_1d(double x0, double h, int nx);
Grid make_grid_2d(double x0, double y0, double h, int nx, int ny);

/// Marks the face free (Gamma_2-type: no data imposed, one-sided zero-flux
/// behavior through the energy). In 2-D the face's corner nodes stay
/// dirichlet: they belong to the adjacent data-carrying faces.
void set_face_free(Grid& g, Face face);

void validate_grid(const Grid& g);

struct Field {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;

  double& at(int i, int j) { return values[grid->index(i, j)]; }
  double at(int i, int j) const { return values[grid->index(i, j)]; }
};

Field make_field(std::shared_ptr<const Grid> grid, double fill = 0.0);
Field make_field(std::shared_ptr<const Grid> grid,
                 const std::function<double(double, double)>& fn);

struct SolveConfig {
  double rel_tol = 1e-12;      // stop on relative energy decrease per sweep
  int max_sweeps = 200000;
  double eps = 0.0;            // |grad|^p regularization, kept at 0 by default
  double relaxation = 0.0;     // 0 = auto: SOR for p=2, plain sweeps otherwise
  double residual_tol = 0.0;   // > 0: additionally require residual_max below this
  bool record_energy_trace = false;
};

struct SolveResult {
  Field field;
  bool converged = false;
  int sweeps = 0;
  double energy = 0.0;
  double residual_max = 0.0;   // max |residual| over unknown nodes
  std::vector<double> energy_trace;
};

/// Discrete energy sum_cells (1/p) w(cell mid) |grad_h u|^p h^N
///                - sum_nodes f u w(node) h^N with cell-centered gradients.
double energy(const WeightSpec& w, double p, const Field& u, const Field& f);

/// Minimizes the discrete energy over non-dirichlet nodes by red-black
/// Gauss-Seidel with nodewise scalar root finding on the energy derivative.
/// Returns converged=false when max_sweeps is reached (result carries the
/// last iterate and its residual).
SolveResult solve_dirichlet(const WeightSpec& w, double p, const Field& f,
                            const Field& boundary, const SolveConfig& cfg = {},
                            const std::optional<Field>& initial = {});

/// Nodewise -div_h(w |grad_h u|^{p-2} grad_h u) - f w; zero on dirichlet
/// nodes by convention. Perturbing one node changes the residual only on
/// that node's stencil.
Field residual(const WeightSpec& w, double p, const Field& u, const Field& f);

/// Bilinear prolongation of a coarse solution onto a finer grid (useful as a
/// solver initial guess under refinement).
Field prolong(const Field& coarse, std::shared_ptr<const Grid> fine);

struct ComparisonReport {
  bool hypotheses_met = true;
  bool holds = false;
  double worst_violation = 0.0;  // max over unknown nodes of u - v
  int worst_node = -1;
  std::string detail;            // offending hypothesis when not met
  int offending_node = -1;
};

/// Discrete comparison probe: hypotheses are u <= v + tol on dirichlet nodes
/// and residual(u) <= residual(v) + tol nodewise on unknowns; conclusion is
/// u <= v + tol on unknowns. Hypothesis failure is a diagnosis, not a crash.
ComparisonReport comparison_check(const WeightSpec& w, double p,
                                  const Field& u, const Field& v,
                                  double comparison_tol = 1e-8);

/// Text snapshot: header (dims, origin, h, p, weight spec, free faces) plus
/// row-major values one per line.
void write_field(std::ostream& os, const Field& u, double p, const WeightSpec& w);
struct FieldSnapshot {
  Field field;
  double p = 2.0;
  WeightSpec weight = WeightSpec::constant(1.0, 2);
};
FieldSnapshot read_field(std::istream& is);

void write_field_csv(std::ostream& os, const Field& u);

}  // namespace wplab
