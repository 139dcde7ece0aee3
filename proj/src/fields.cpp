#include "magel/fields.hpp"

#include <cmath>

#include "magel/errors.hpp"

namespace magel {

BoundarySelector parse_boundary_selector(const std::string& name) {
  if (name == "left-edge") return BoundarySelector::kLeftEdge;
  if (name == "full-boundary") return BoundarySelector::kFullBoundary;
  if (name == "bottom-edge") return BoundarySelector::kBottomEdge;
  throw DomainError("unknown boundary selector '" + name + "'");
}

std::string to_string(BoundarySelector gamma) {
  switch (gamma) {
    case BoundarySelector::kLeftEdge: return "left-edge";
    case BoundarySelector::kFullBoundary: return "full-boundary";
    case BoundarySelector::kBottomEdge: return "bottom-edge";
  }
  return "?";
}

int GridSpec::num_gamma_nodes() const {
  int count = 0;
  for (bool b : on_gamma) count += b ? 1 : 0;
  return count;
}

double GridSpec::area_total() const {
  double total = 0.0;
  for (double a : areas) total += a;
  return total;
}

GridSpec build_grid(int n, BoundarySelector gamma) {
  if (n < 3) throw InvalidGrid("build_grid: need n >= 3, got " + std::to_string(n));
  GridSpec g;
  g.n = n;
  g.gamma = gamma;
  const double h = 1.0 / (n - 1);
  g.nodes.reserve(n * n);
  g.on_gamma.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g.nodes.emplace_back(i * h, j * h);
      bool boundary = false;
      switch (gamma) {
        case BoundarySelector::kLeftEdge: boundary = i == 0; break;
        case BoundarySelector::kBottomEdge: boundary = j == 0; break;
        case BoundarySelector::kFullBoundary:
          boundary = i == 0 || j == 0 || i == n - 1 || j == n - 1;
          break;
      }
      g.on_gamma.push_back(boundary);
    }
  }
  auto id = [n](int i, int j) { return j * n + i; };
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      g.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      g.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  for (const auto& tri : g.elements) {
    const Vec2& x0 = g.nodes[tri[0]];
    const Vec2& x1 = g.nodes[tri[1]];
    const Vec2& x2 = g.nodes[tri[2]];
    Mat2 jac;
    jac.col(0) = x1 - x0;
    jac.col(1) = x2 - x0;
    const double det = determinant(jac);
    if (!(det > 0.0)) throw InvalidGrid("build_grid: non-positive element area");
    g.areas.push_back(0.5 * det);
    // Rows of J^-1 are the gradients of lambda_1 and lambda_2.
    const Mat2 inv = invert(jac);
    const Vec2 g1 = inv.row(0).transpose();
    const Vec2 g2 = inv.row(1).transpose();
    g.shape_gradients.push_back({-g1 - g2, g1, g2});
  }
  return g;
}

StateFields StateFields::zeros(const GridSpec& grid) {
  return {Eigen::Matrix2Xd::Zero(2, grid.num_nodes()), Eigen::VectorXd::Zero(grid.num_nodes())};
}

MagnetizationVector StateFields::magnetization(int node) const {
  return {std::cos(phi(node)), std::sin(phi(node))};
}

Vec2 BoundaryDatum::value(const Vec2& x) const {
  switch (kind) {
    case Kind::kZero: return Vec2::Zero();
    case Kind::kUniaxialStretch: return {alpha * x(0), 0.0};
    case Kind::kShear: return {alpha * x(1), 0.0};
    case Kind::kBending: return {-alpha * x(0) * (x(1) - 0.5), 0.5 * alpha * x(0) * x(0)};
  }
  return Vec2::Zero();
}

Mat2 BoundaryDatum::gradient(const Vec2& x) const {
  switch (kind) {
    case Kind::kZero: return Mat2::Zero();
    case Kind::kUniaxialStretch: return Mat2{{alpha, 0.0}, {0.0, 0.0}};
    case Kind::kShear: return Mat2{{0.0, alpha}, {0.0, 0.0}};
    case Kind::kBending:
      return Mat2{{-alpha * (x(1) - 0.5), -alpha * x(0)}, {alpha * x(0), 0.0}};
  }
  return Mat2::Zero();
}

BoundaryDatum::Kind BoundaryDatum::parse_kind(const std::string& name) {
  if (name == "zero") return Kind::kZero;
  if (name == "uniaxial-stretch") return Kind::kUniaxialStretch;
  if (name == "shear") return Kind::kShear;
  if (name == "bending") return Kind::kBending;
  throw DomainError("unknown boundary datum '" + name + "'");
}

std::string BoundaryDatum::kind_name(Kind kind) {
  switch (kind) {
    case Kind::kZero: return "zero";
    case Kind::kUniaxialStretch: return "uniaxial-stretch";
    case Kind::kShear: return "shear";
    case Kind::kBending: return "bending";
  }
  return "?";
}

Vec2 element_gradient(const GridSpec& grid, std::span<const double> values, int elem) {
  const auto& tri = grid.elements[elem];
  const auto& dl = grid.shape_gradients[elem];
  return values[tri[0]] * dl[0] + values[tri[1]] * dl[1] + values[tri[2]] * dl[2];
}

Mat2 element_gradient(const GridSpec& grid, const Eigen::Matrix2Xd& field, int elem) {
  const auto& tri = grid.elements[elem];
  const auto& dl = grid.shape_gradients[elem];
  Mat2 g = Mat2::Zero();
  for (int a = 0; a < 3; ++a) g += field.col(tri[a]) * dl[a].transpose();
  return g;
}

Mat2 deformation_gradient(const GridSpec& grid, const StateFields& state, double eps, int elem) {
  return Mat2::Identity() + eps * element_gradient(grid, state.u, elem);
}

MagnetizationVector element_magnetization(const GridSpec& grid, const StateFields& state,
                                          int elem) {
  Vec2 s = Vec2::Zero();
  for (int k : grid.elements[elem]) s += state.magnetization(k);
  return s.normalized();
}

MagnetizationVector eulerian_magnetization(const GridSpec& grid, const StateFields& state,
                                           double eps, int elem) {
  const double det = determinant(deformation_gradient(grid, state, eps, elem));
  if (!(det > 0.0)) {
    throw DegenerateElement("eulerian_magnetization: det F <= 0 on element " +
                                std::to_string(elem),
                            {elem});
  }
  return element_magnetization(grid, state, elem) / det;
}

Eigen::Matrix2Xd nodal_magnetization(const StateFields& state) {
  Eigen::Matrix2Xd m(2, state.phi.size());
  m.row(0) = state.phi.array().cos().transpose();
  m.row(1) = state.phi.array().sin().transpose();
  return m;
}

ExchangeElement exchange_element(const Mat2& g, const Mat2& f, double area) {
  ExchangeElement out;
  const double det = determinant(f);
  const Mat2 b = invert(f);
  const Mat2 gb = g * b;
  const double sq = gb.squaredNorm();
  out.value = 0.5 * area * sq / det;
  out.d_f = 0.5 * area / det * (-2.0 * gb.transpose() * gb * b.transpose() -
                                sq * b.transpose());
  out.d_g = area / det * gb * b.transpose();
  return out;
}

double exchange_energy_pullback(const GridSpec& grid, const StateFields& state, double eps) {
  const Eigen::Matrix2Xd m = nodal_magnetization(state);
  double total = 0.0;
  std::vector<int> bad;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const Mat2 f = deformation_gradient(grid, state, eps, e);
    if (!(determinant(f) > 0.0)) {
      bad.push_back(e);
      continue;
    }
    total += exchange_element(element_gradient(grid, m, e), f, grid.areas[e]).value;
  }
  if (!bad.empty()) {
    throw DegenerateElement("exchange_energy_pullback: det F <= 0 on " +
                                std::to_string(bad.size()) + " element(s)",
                            bad);
  }
  return total;
}

StateFields apply_dirichlet(const GridSpec& grid, StateFields state, const BoundaryDatum& w) {
  for (int k = 0; k < grid.num_nodes(); ++k) {
    if (grid.on_gamma[k]) state.u.col(k) = w.value(grid.nodes[k]);
  }
  return state;
}

}  // namespace magel
