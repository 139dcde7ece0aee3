#include "magel/magnetostatics.hpp"

#include <fftw3.h>
#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "magel/errors.hpp"

namespace magel {

namespace {

// FFTW planning is not thread safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double orient(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b(0) - a(0)) * (p(1) - a(1)) - (b(1) - a(1)) * (p(0) - a(0));
}

using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 6, 1>>;

inline double value_of(double x) { return x; }
inline double value_of(const AD& x) { return x.value(); }

template <typename S>
using Point = std::array<S, 2>;

// One Sutherland-Hodgman pass against the half-plane x_axis >= c (or <= c).
template <typename S>
void clip_half_plane(const std::vector<Point<S>>& in, int axis, double c, bool keep_greater,
                     std::vector<Point<S>>& out) {
  out.clear();
  const size_t n = in.size();
  auto inside = [&](const Point<S>& p) {
    return keep_greater ? value_of(p[axis]) >= c : value_of(p[axis]) <= c;
  };
  for (size_t k = 0; k < n; ++k) {
    const Point<S>& p = in[k];
    const Point<S>& q = in[(k + 1) % n];
    const bool p_in = inside(p);
    if (p_in) out.push_back(p);
    if (p_in != inside(q)) {
      const S t = (S(c) - p[axis]) / (q[axis] - p[axis]);
      Point<S> r;
      r[axis] = S(c);
      r[1 - axis] = p[1 - axis] + t * (q[1 - axis] - p[1 - axis]);
      out.push_back(r);
    }
  }
}

// Area of triangle (a, b, c) intersected with the cell [x0, x0 + h] x [y0, y0 + h].
// Works in cell-local coordinates so the shoelace sum does not lose digits.
template <typename S>
S clipped_area(const std::array<Point<S>, 3>& tri, double x0, double y0, double h) {
  std::vector<Point<S>> poly;
  std::vector<Point<S>> tmp;
  tmp.reserve(8);
  poly.reserve(8);
  for (const Point<S>& p : tri) poly.push_back({p[0] - x0, p[1] - y0});
  clip_half_plane(poly, 0, 0.0, true, tmp);
  clip_half_plane(tmp, 0, h, false, poly);
  clip_half_plane(poly, 1, 0.0, true, tmp);
  clip_half_plane(tmp, 1, h, false, poly);
  S twice = S(0.0);
  for (size_t k = 0; k < poly.size(); ++k) {
    const Point<S>& p = poly[k];
    const Point<S>& q = poly[(k + 1) % poly.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * twice;
}

}  // namespace

Vec2 BoxGrid::cell_center(int i, int j) const {
  const double h = spacing();
  return {origin() + (i + 0.5) * h, origin() + (j + 0.5) * h};
}

Vec2 BoxGrid::node(int i, int j) const {
  const double h = spacing();
  return {origin() + i * h, origin() + j * h};
}

Rasterization rasterize_pushforward(const GridSpec& grid, const StateFields& state, double eps,
                                    const BoxGrid& box, bool with_derivatives) {
  const int n_cells = box.cells;
  const double h = box.spacing();
  const double lo = box.origin();
  const double hi = lo + n_cells * h;

  std::vector<Vec2> y(grid.num_nodes());
  for (int k = 0; k < grid.num_nodes(); ++k) {
    y[k] = grid.nodes[k] + eps * state.u.col(k);
    if (!(y[k](0) > lo && y[k](0) < hi && y[k](1) > lo && y[k](1) < hi)) {
      throw Inadmissible("rasterize_pushforward: deformed body leaves the magnetostatic box",
                         {});
    }
  }

  Rasterization out;
  out.element_field.resize(grid.num_elements());
  std::vector<int> bad;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const double det = determinant(deformation_gradient(grid, state, eps, e));
    if (!(det > 0.0)) {
      bad.push_back(e);
      continue;
    }
    out.element_field[e] = element_magnetization(grid, state, e) / det;
  }
  if (!bad.empty()) {
    throw DegenerateElement("rasterize_pushforward: det F <= 0", bad);
  }

  out.field = CellField::Zero(2, box.num_cells());
  out.owner.assign(box.num_cells(), -1);
  std::vector<char> strict(box.num_cells(), 0);
  const double inv_cell_area = 1.0 / (h * h);
  auto cell_index = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - lo) / h)), 0, n_cells - 1);
  };

  for (int e = 0; e < grid.num_elements(); ++e) {
    const auto& tri = grid.elements[e];
    const Vec2& a = y[tri[0]];
    const Vec2& b = y[tri[1]];
    const Vec2& c = y[tri[2]];
    const MagnetizationVector& m = out.element_field[e];
    const int i0 = cell_index(std::min({a(0), b(0), c(0)}));
    const int i1 = cell_index(std::max({a(0), b(0), c(0)}));
    const int j0 = cell_index(std::min({a(1), b(1), c(1)}));
    const int j1 = cell_index(std::max({a(1), b(1), c(1)}));

    std::array<Point<double>, 3> plain{{{a(0), a(1)}, {b(0), b(1)}, {c(0), c(1)}}};
    std::array<Point<AD>, 3> dual;
    if (with_derivatives) {
      for (int v = 0; v < 3; ++v) {
        const Vec2& p = y[tri[v]];
        dual[v] = {AD(p(0), 6, 2 * v), AD(p(1), 6, 2 * v + 1)};
      }
    }

    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const int cell = j * n_cells + i;
        const double x0 = lo + i * h;
        const double y0 = lo + j * h;
        CellFragment frag;
        frag.element = e;
        frag.cell = cell;
        if (with_derivatives) {
          const AD area = clipped_area(dual, x0, y0, h);
          frag.area = area.value();
          frag.d_area = area.derivatives();
        } else {
          frag.area = clipped_area(plain, x0, y0, h);
        }
        if (frag.area > 0.0) {
          out.field.col(cell) += frag.area * inv_cell_area * m;
          if (with_derivatives) out.fragments.push_back(frag);
        }

        const Vec2 p = box.cell_center(i, j);
        const double o0 = orient(b, c, p);
        const double o1 = orient(c, a, p);
        const double o2 = orient(a, b, p);
        if (o0 < 0.0 || o1 < 0.0 || o2 < 0.0) continue;
        const bool inside = o0 > 0.0 && o1 > 0.0 && o2 > 0.0;
        if (out.owner[cell] < 0) {
          out.owner[cell] = e;
          strict[cell] = inside ? 1 : 0;
        } else if (inside && strict[cell]) {
          ++out.overlap_cells;
        }
      }
    }
  }
  return out;
}

// Sine-transform diagonalization of the Dirichlet 5-point operator.
struct PotentialSolver::Spectral {
  int n = 0;  // interior nodes per side
  std::vector<double> inv_eigen;
  mutable std::vector<double> work;
  fftw_plan plan = nullptr;

  Spectral(int cells, double mu0) : n(cells - 1), work(static_cast<size_t>(n) * n) {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      plan = fftw_plan_r2r_2d(n, n, work.data(), work.data(), FFTW_RODFT00, FFTW_RODFT00,
                              FFTW_ESTIMATE);
    }
    const double scale = 1.0 / (4.0 * cells * cells);
    inv_eigen.resize(work.size());
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        const double lambda = mu0 * (4.0 - 2.0 * std::cos(M_PI * (k + 1) / cells) -
                                     2.0 * std::cos(M_PI * (l + 1) / cells));
        inv_eigen[l * n + k] = scale / lambda;
      }
    }
  }
  ~Spectral() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
    std::copy(r.data(), r.data() + r.size(), work.begin());
    fftw_execute_r2r(plan, work.data(), work.data());
    for (size_t i = 0; i < work.size(); ++i) work[i] *= inv_eigen[i];
    fftw_execute_r2r(plan, work.data(), work.data());
    std::copy(work.begin(), work.end(), z.data());
  }
};

PotentialSolver::PotentialSolver(BoxGrid box, MagnetostaticsOptions options)
    : box_(box), options_(options) {
  if (box_.cells < 2) throw InvalidGrid("magnetostatics: need at least 2 cells per side");
  if (!(box_.pad > 0.0)) throw InvalidGrid("magnetostatics: pad must be positive");
  if (options_.spectral_preconditioner && options_.mu0 > 0.0) {
    spectral_ = std::make_unique<Spectral>(box_.cells, options_.mu0);
  }
}

PotentialSolver::~PotentialSolver() = default;

Potential PotentialSolver::solve(const CellField& f) const {
  const int nc = box_.cells;
  const int nn = nc + 1;
  const int ni = nc - 1;
  const double h = box_.spacing();
  const double mu0 = options_.mu0;
  Potential out;
  out.v = Eigen::VectorXd::Zero(nn * nn);
  if (!(mu0 > 0.0)) return out;

  auto cell_x = [&](int i, int j) {
    return (i >= 0 && i < nc && j >= 0 && j < nc) ? f(0, j * nc + i) : 0.0;
  };
  auto cell_y = [&](int i, int j) {
    return (i >= 0 && i < nc && j >= 0 && j < nc) ? f(1, j * nc + i) : 0.0;
  };
  // Edge-averaged source: x-component on horizontal edges (i, j)-(i+1, j),
  // y-component on vertical edges (i, j)-(i, j+1).
  auto px = [&](int i, int j) { return 0.5 * (cell_x(i, j - 1) + cell_x(i, j)); };
  auto py = [&](int i, int j) { return 0.5 * (cell_y(i - 1, j) + cell_y(i, j)); };

  // b = h^2 D^T P f on interior nodes.
  Eigen::VectorXd b(ni * ni);
  for (int j = 1; j < nc; ++j) {
    for (int i = 1; i < nc; ++i) {
      b((j - 1) * ni + (i - 1)) = h * (px(i - 1, j) - px(i, j) + py(i, j - 1) - py(i, j));
    }
  }

  auto apply_a = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    for (int j = 0; j < ni; ++j) {
      for (int i = 0; i < ni; ++i) {
        const int k = j * ni + i;
        double s = 4.0 * x(k);
        if (i > 0) s -= x(k - 1);
        if (i + 1 < ni) s -= x(k + 1);
        if (j > 0) s -= x(k - ni);
        if (j + 1 < ni) s -= x(k + ni);
        y(k) = mu0 * s;
      }
    }
  };
  auto precondition = [&](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
    if (spectral_) {
      spectral_->apply(r, z);
    } else {
      z = r / (4.0 * mu0);
    }
  };

  const double b_norm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ni * ni);
  if (b_norm == 0.0) return out;

  Eigen::VectorXd r = b;
  Eigen::VectorXd z(ni * ni);
  Eigen::VectorXd ap(ni * ni);
  precondition(r, z);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  int it = 0;
  double rel = 1.0;
  while (it < options_.cg_max) {
    apply_a(p, ap);
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    ++it;
    rel = r.norm() / b_norm;
    if (rel <= options_.cg_tol) break;
    precondition(r, z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  out.iterations = it;
  out.relative_residual = rel;
  if (rel > options_.cg_tol) {
    throw NoConvergence("solve_potential: CG stalled at relative residual " + std::to_string(rel),
                        it);
  }
  for (int j = 1; j < nc; ++j) {
    for (int i = 1; i < nc; ++i) out.v(j * nn + i) = x((j - 1) * ni + (i - 1));
  }
  return out;
}

Potential solve_potential(const CellField& f, const BoxGrid& box,
                          const MagnetostaticsOptions& options) {
  return PotentialSolver(box, options).solve(f);
}

namespace {

template <typename Visit>
void for_each_edge_gradient(const Eigen::VectorXd& v, const BoxGrid& box, Visit&& visit) {
  const int nc = box.cells;
  const int nn = nc + 1;
  const double h = box.spacing();
  for (int j = 0; j <= nc; ++j) {
    for (int i = 0; i < nc; ++i) {
      visit(0, i, j, (v(j * nn + i + 1) - v(j * nn + i)) / h);
    }
  }
  for (int j = 0; j < nc; ++j) {
    for (int i = 0; i <= nc; ++i) {
      visit(1, i, j, (v((j + 1) * nn + i) - v(j * nn + i)) / h);
    }
  }
}

}  // namespace

double potential_gradient_norm(const Eigen::VectorXd& v, const BoxGrid& box) {
  long double sum = 0.0L;
  for_each_edge_gradient(v, box, [&](int, int, int, double g) { sum += g * g; });
  return box.spacing() * std::sqrt(static_cast<double>(sum));
}

double demag_energy(const Eigen::VectorXd& v, double mu0, const BoxGrid& box) {
  long double sum = 0.0L;
  for_each_edge_gradient(v, box, [&](int, int, int, double g) { sum += g * g; });
  const double h = box.spacing();
  return static_cast<double>(0.5L * mu0 * h * h * sum);
}

double demag_energy(const Eigen::VectorXd& v, const CellField& f, double mu0,
                    const BoxGrid& box) {
  const CellField g = demag_source_gradient(v, box);
  long double work = 0.0L;
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    work += f(0, c) * g(0, c);
    work += f(1, c) * g(1, c);
  }
  long double sum = 0.0L;
  for_each_edge_gradient(v, box, [&](int, int, int, double d) { sum += d * d; });
  const double h = box.spacing();
  return static_cast<double>(work - 0.5L * mu0 * h * h * sum);
}

CellField demag_source_gradient(const Eigen::VectorXd& v, const BoxGrid& box) {
  const int nc = box.cells;
  const double w = 0.5 * box.spacing() * box.spacing();
  CellField g = CellField::Zero(2, box.num_cells());
  for_each_edge_gradient(v, box, [&](int dir, int i, int j, double d) {
    if (dir == 0) {
      if (j - 1 >= 0) g(0, (j - 1) * nc + i) += w * d;
      if (j < nc) g(0, j * nc + i) += w * d;
    } else {
      if (i - 1 >= 0) g(1, j * nc + i - 1) += w * d;
      if (i < nc) g(1, j * nc + i) += w * d;
    }
  });
  return g;
}

double cell_l2_norm(const CellField& f, const BoxGrid& box) {
  return box.spacing() * f.norm();
}

}  // namespace magel
