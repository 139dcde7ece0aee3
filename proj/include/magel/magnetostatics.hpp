#pragma once

// Magnetostatic potential on a truncated box (-pad, 1 + pad)^2 with v = 0 on
// the box boundary. v lives on the (N + 1)^2 box nodes, the source field on
// the N^2 cells. Derivatives of v live on cell edges (5-point stencil); the
// cell source is averaged onto the same edges, so the discrete problem is an
// exact Galerkin projection:
//   mu0 * D^T D v = D^T P f,   energy = mu0 / 2 * |D v|^2.

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

#include "magel/fields.hpp"

namespace magel {

struct BoxGrid {
  double pad = 1.0;
  int cells = 128;  ///< N, cells per side

  double spacing() const { return (1.0 + 2.0 * pad) / cells; }
  double origin() const { return -pad; }
  Vec2 cell_center(int i, int j) const;
  Vec2 node(int i, int j) const;
  int num_cells() const { return cells * cells; }
  int num_nodes() const { return (cells + 1) * (cells + 1); }
};

/// Per-cell 2-vector source, column c = j * N + i.
using CellField = Eigen::Matrix2Xd;

/// Overlap of one deformed element with one box cell. d_area is the
/// derivative of the area with respect to the deformed vertex coordinates
/// (x0, y0, x1, y1, x2, y2) in element order.
struct CellFragment {
  int element = 0;
  int cell = 0;
  double area = 0.0;
  Eigen::Matrix<double, 6, 1> d_area = Eigen::Matrix<double, 6, 1>::Zero();
};

struct Rasterization {
  CellField field;  ///< cell averages of chi_{y(Omega)} m
  std::vector<MagnetizationVector> element_field;  ///< m o y per element
  std::vector<CellFragment> fragments;
  std::vector<int> owner;  ///< element containing the cell center, -1 outside
  int overlap_cells = 0;   ///< cell centers strictly inside two or more deformed elements
};

/// Cell averages of chi_{y(Omega)} m: each deformed triangle is clipped
/// against every box cell it touches and contributes (overlap area / h^2) m.
/// The result is Lipschitz in the node positions. Cell-center ownership
/// (lowest element index on shared edges) is kept for overlap diagnostics.
/// Throws DegenerateElement when some det F <= 0 and Inadmissible when a
/// deformed node leaves the open box.
Rasterization rasterize_pushforward(const GridSpec& grid, const StateFields& state, double eps,
                                    const BoxGrid& box, bool with_derivatives = false);

struct MagnetostaticsOptions {
  double mu0 = 1.0;
  double cg_tol = 1e-10;
  int cg_max = 2000;
  bool spectral_preconditioner = true;
};

struct Potential {
  Eigen::VectorXd v;  ///< nodal values, node (i, j) at j * (N + 1) + i
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate-gradient solver for the box problem. The optional preconditioner
/// is the exact sine-transform inverse of the 5-point Dirichlet Laplacian.
class PotentialSolver {
 public:
  PotentialSolver(BoxGrid box, MagnetostaticsOptions options);
  ~PotentialSolver();
  PotentialSolver(const PotentialSolver&) = delete;
  PotentialSolver& operator=(const PotentialSolver&) = delete;

  const BoxGrid& box() const { return box_; }
  const MagnetostaticsOptions& options() const { return options_; }

  /// Throws NoConvergence if the relative residual stays above cg_tol.
  Potential solve(const CellField& f) const;

 private:
  struct Spectral;
  BoxGrid box_;
  MagnetostaticsOptions options_;
  std::unique_ptr<Spectral> spectral_;
};

/// Convenience wrapper around PotentialSolver.
Potential solve_potential(const CellField& f, const BoxGrid& box,
                          const MagnetostaticsOptions& options);

/// mu0 / 2 * |D v|^2 with the solver's stencil.
double demag_energy(const Eigen::VectorXd& v, double mu0, const BoxGrid& box);
/// h^2 (<D v, P f> - mu0 / 2 |D v|^2). Equals demag_energy(v) when v solves
/// the box problem for f; the error is quadratic in the solver error instead
/// of linear, which keeps energy differences clean near a minimizer.
double demag_energy(const Eigen::VectorXd& v, const CellField& f, double mu0, const BoxGrid& box);

/// Derivative of the demag energy with respect to the cell source: h^2 P^T D v.
CellField demag_source_gradient(const Eigen::VectorXd& v, const BoxGrid& box);

/// sqrt(h^2 sum |f_c|^2)
double cell_l2_norm(const CellField& f, const BoxGrid& box);

/// sqrt(h^2 sum_edges (D v)^2)
double potential_gradient_norm(const Eigen::VectorXd& v, const BoxGrid& box);

}  // namespace magel
