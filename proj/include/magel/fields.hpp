#pragma once

// Reference-domain discretization of the unit square: P1 triangles, nodal
// displacement and magnetization-angle fields, Dirichlet data on a boundary
// part Gamma, and the per-element kinematics of y = id + eps u.

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

#include "magel/energy_model.hpp"
#include "magel/tensor_core.hpp"

namespace magel {

enum class BoundarySelector { kLeftEdge, kFullBoundary, kBottomEdge };

BoundarySelector parse_boundary_selector(const std::string& name);
std::string to_string(BoundarySelector gamma);

/// Uniform triangulation of (0,1)^2 with n x n nodes. Node k = j * n + i sits
/// at (i, j) / (n - 1); square (i, j) is split along its rising diagonal into
/// triangles 2s and 2s + 1, both counterclockwise.
struct GridSpec {
  int n = 0;
  BoundarySelector gamma = BoundarySelector::kLeftEdge;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> elements;
  /// Gradients of the three barycentric coordinates, constant per element.
  std::vector<std::array<Vec2, 3>> shape_gradients;
  std::vector<double> areas;
  std::vector<bool> on_gamma;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_gamma_nodes() const;
  double area_total() const;
};

/// Throws InvalidGrid for n < 3.
GridSpec build_grid(int n, BoundarySelector gamma);

/// Nodal displacement u (2 x nodes) and magnetization angle phi. The
/// Lagrangian magnetization M = (cos phi, sin phi) is unit by construction.
struct StateFields {
  Eigen::Matrix2Xd u;
  Eigen::VectorXd phi;

  static StateFields zeros(const GridSpec& grid);
  MagnetizationVector magnetization(int node) const;
};

/// Analytic Dirichlet datum w from a small polynomial catalog.
struct BoundaryDatum {
  enum class Kind { kZero, kUniaxialStretch, kShear, kBending };
  Kind kind = Kind::kZero;
  double alpha = 0.0;

  Vec2 value(const Vec2& x) const;
  Mat2 gradient(const Vec2& x) const;

  static Kind parse_kind(const std::string& name);
  static std::string kind_name(Kind kind);
};

/// Gradient of the linear interpolant of scalar nodal values on `elem`.
Vec2 element_gradient(const GridSpec& grid, std::span<const double> values, int elem);

/// Gradient of a vector field; row c holds the gradient of component c.
Mat2 element_gradient(const GridSpec& grid, const Eigen::Matrix2Xd& field, int elem);

/// F = I + eps grad u on `elem`.
Mat2 deformation_gradient(const GridSpec& grid, const StateFields& state, double eps, int elem);

/// Lagrangian magnetization of an element: mean of the nodal unit vectors,
/// renormalized.
MagnetizationVector element_magnetization(const GridSpec& grid, const StateFields& state, int elem);

/// m o y = M / det F at the element. Throws DegenerateElement for det F <= 0.
MagnetizationVector eulerian_magnetization(const GridSpec& grid, const StateFields& state,
                                           double eps, int elem);

/// Nodal unit vectors M_k as a 2 x nodes matrix.
Eigen::Matrix2Xd nodal_magnetization(const StateFields& state);

/// Exchange energy of one element in reference coordinates,
/// 1/2 |G F^-1|^2 / det F * area, where G is the Lagrangian gradient of M.
struct ExchangeElement {
  double value = 0.0;
  Mat2 d_f = Mat2::Zero();
  Mat2 d_g = Mat2::Zero();
};
ExchangeElement exchange_element(const Mat2& g, const Mat2& f, double area);

/// 1/2 int_{y(Omega)} |grad m|^2 pulled back to the reference grid.
/// Throws DegenerateElement if some det F <= 0.
double exchange_energy_pullback(const GridSpec& grid, const StateFields& state, double eps);

/// Sets u = w on Gamma nodes; interior nodes are left as they are.
StateFields apply_dirichlet(const GridSpec& grid, StateFields state, const BoundaryDatum& w);

}  // namespace magel
