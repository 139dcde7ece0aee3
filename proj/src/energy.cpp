#include "magel/energy.hpp"

#include <cmath>

#include "magel/errors.hpp"

namespace magel {

namespace {

// Interior three-point rule, exact for quadratics.
constexpr double kQuadBary[3][3] = {
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
};

Vec2 perp(const Vec2& v) { return {-v(1), v(0)}; }

Mat2 cofactor(const Mat2& f) { return Mat2{{f(1, 1), -f(1, 0)}, {-f(0, 1), f(0, 0)}}; }

Eigen::Vector4d vec(const Mat2& h) { return {h(0, 0), h(0, 1), h(1, 0), h(1, 1)}; }

Mat2 unvec(const Eigen::Vector4d& v) { return Mat2{{v(0), v(1)}, {v(2), v(3)}}; }

// Accumulates full-layout gradients element by element.
class GradientSink {
 public:
  GradientSink(const GridSpec& grid, const StateFields& state, Eigen::VectorXd* full)
      : grid_(grid), state_(state), full_(full), nodes_(grid.num_nodes()) {}

  bool active() const { return full_ != nullptr; }

  // dE/d(grad u) on element e.
  void add_grad_u(int e, const Mat2& d) {
    const auto& tri = grid_.elements[e];
    const auto& dl = grid_.shape_gradients[e];
    for (int a = 0; a < 3; ++a) {
      const Vec2 g = d * dl[a];
      (*full_)(2 * tri[a]) += g(0);
      (*full_)(2 * tri[a] + 1) += g(1);
    }
  }

  // dE/d(grad M) on element e, M the P1 interpolant of nodal unit vectors.
  void add_grad_m(int e, const Mat2& d) {
    const auto& tri = grid_.elements[e];
    const auto& dl = grid_.shape_gradients[e];
    for (int a = 0; a < 3; ++a) {
      const Vec2 dm = perp(state_.magnetization(tri[a]));
      (*full_)(2 * nodes_ + tri[a]) += dm.dot(d * dl[a]);
    }
  }

  // dE/d(alpha) where alpha is the angle of the renormalized element average.
  void add_element_angle(int e, double d) {
    const auto& tri = grid_.elements[e];
    Vec2 s = Vec2::Zero();
    for (int k : tri) s += state_.magnetization(k);
    s /= 3.0;
    const double s2 = s.squaredNorm();
    for (int k : tri) {
      (*full_)(2 * nodes_ + k) += d * s.dot(state_.magnetization(k)) / (3.0 * s2);
    }
  }

 private:
  const GridSpec& grid_;
  const StateFields& state_;
  Eigen::VectorXd* full_;
  int nodes_;
};

}  // namespace

DofMap::DofMap(const GridSpec& grid, bool freeze_phi)
    : num_nodes_(grid.num_nodes()), num_full_(3 * grid.num_nodes()), phi_frozen_(freeze_phi) {
  for (int k = 0; k < num_nodes_; ++k) {
    if (!grid.on_gamma[k]) {
      free_.push_back(2 * k);
      free_.push_back(2 * k + 1);
    }
  }
  if (!freeze_phi) {
    for (int k = 0; k < num_nodes_; ++k) free_.push_back(2 * num_nodes_ + k);
  }
}

Eigen::VectorXd DofMap::gather(const StateFields& state) const {
  Eigen::VectorXd x(num_free());
  for (int i = 0; i < num_free(); ++i) {
    const int idx = free_[i];
    x(i) = idx < 2 * num_nodes_ ? state.u(idx % 2, idx / 2) : state.phi(idx - 2 * num_nodes_);
  }
  return x;
}

void DofMap::scatter(const Eigen::VectorXd& x, StateFields& state) const {
  for (int i = 0; i < num_free(); ++i) {
    const int idx = free_[i];
    if (idx < 2 * num_nodes_) {
      state.u(idx % 2, idx / 2) = x(i);
    } else {
      state.phi(idx - 2 * num_nodes_) = x(i);
    }
  }
}

Eigen::VectorXd DofMap::restrict_gradient(const Eigen::VectorXd& full) const {
  Eigen::VectorXd g(num_free());
  for (int i = 0; i < num_free(); ++i) g(i) = full(free_[i]);
  return g;
}

EnergyContext::EnergyContext(GridSpec grid, std::shared_ptr<const StoredEnergy> model,
                             BoxGrid box, MagnetostaticsOptions magnetostatics,
                             std::optional<LoadSpec> loads, bool freeze_phi)
    : grid_(std::move(grid)),
      model_(std::move(model)),
      solver_(std::make_shared<PotentialSolver>(box, magnetostatics)),
      loads_(std::move(loads)),
      dofs_(grid_, freeze_phi),
      elasticity_(model_->elasticity()) {}

EnergyContext EnergyContext::with_frozen_phi(bool freeze) const {
  EnergyContext copy = *this;
  copy.dofs_ = DofMap(grid_, freeze);
  return copy;
}

EnergyContext EnergyContext::without_loads() const {
  EnergyContext copy = *this;
  copy.loads_.reset();
  return copy;
}

LoadValues loads_eval(const GridSpec& grid, const StateFields& state, double eps,
                      const LoadSpec& loads) {
  LoadValues out;
  const int nodes = grid.num_nodes();
  long double load_work = 0.0L;
  long double zeeman = 0.0L;
  out.gradient_load_work = Eigen::VectorXd::Zero(3 * nodes);
  out.gradient_zeeman = Eigen::VectorXd::Zero(3 * nodes);
  for (int e = 0; e < grid.num_elements(); ++e) {
    const auto& tri = grid.elements[e];
    const double w = grid.areas[e] / 3.0;
    for (const auto& bary : kQuadBary) {
      Vec2 x = Vec2::Zero();
      Vec2 u = Vec2::Zero();
      Vec2 m = Vec2::Zero();
      for (int a = 0; a < 3; ++a) {
        x += bary[a] * grid.nodes[tri[a]];
        u += bary[a] * state.u.col(tri[a]);
        m += bary[a] * state.magnetization(tri[a]);
      }
      const Vec2 f = loads.f(x);
      const Vec2 y = x + eps * u;
      const Vec2 h = loads.h(y);
      const Vec2 dh_du = eps * loads.h.jacobian(y).transpose() * m;
      load_work += w * f.dot(u);
      zeeman += w * h.dot(m);
      for (int a = 0; a < 3; ++a) {
        const int k = tri[a];
        out.gradient_load_work(2 * k) += w * bary[a] * f(0);
        out.gradient_load_work(2 * k + 1) += w * bary[a] * f(1);
        out.gradient_zeeman(2 * k) += w * bary[a] * dh_du(0);
        out.gradient_zeeman(2 * k + 1) += w * bary[a] * dh_du(1);
        out.gradient_zeeman(2 * nodes + k) += w * bary[a] * h.dot(perp(state.magnetization(k)));
      }
    }
  }
  out.load_work = static_cast<double>(load_work);
  out.zeeman = static_cast<double>(zeeman);
  return out;
}

EnergyReport evaluate(const EnergyContext& ctx, const StateFields& state, const Objective& obj,
                      bool with_gradient) {
  const GridSpec& grid = ctx.grid();
  const int nodes = grid.num_nodes();
  const double eps = obj.eps.value_or(0.0);
  EnergyReport report;

  // Admissibility first: every later term assumes det F > 0.
  std::vector<Mat2> f(grid.num_elements());
  for (int e = 0; e < grid.num_elements(); ++e) {
    f[e] = deformation_gradient(grid, state, eps, e);
    if (!obj.is_limit() && !(determinant(f[e]) > 0.0)) report.bad_elements.push_back(e);
  }
  if (!report.bad_elements.empty()) {
    report.admissible = false;
    report.total = kInfinity;
    return report;
  }

  Eigen::VectorXd full;
  if (with_gradient) full = Eigen::VectorXd::Zero(3 * nodes);
  GradientSink sink(grid, state, with_gradient ? &full : nullptr);
  const Eigen::Matrix2Xd m_nodes = nodal_magnetization(state);
  // Extended-precision accumulators keep the totals smooth to rounding level,
  // which the line search relies on near a minimizer.
  long double elastic = 0.0L;
  long double exchange = 0.0L;

  for (int e = 0; e < grid.num_elements(); ++e) {
    const double area = grid.areas[e];
    const MagnetizationVector mc = element_magnetization(grid, state, e);
    const Mat2 grad_m = element_gradient(grid, m_nodes, e);

    if (obj.is_limit()) {
      const Mat2 grad_u = element_gradient(grid, state.u, e);
      const Mat2 strain = sym(grad_u) + E_of(mc);
      const Mat2 stress = unvec(ctx.elasticity().entries * vec(strain));
      elastic += 0.5 * area * ddot(stress, strain);
      exchange += 0.5 * area * grad_m.squaredNorm();
      if (sink.active()) {
        sink.add_grad_u(e, area * sym(stress));
        const Mat2 de{{2.0 * mc(0) * mc(1), mc(1) * mc(1) - mc(0) * mc(0)},
                      {mc(1) * mc(1) - mc(0) * mc(0), -2.0 * mc(0) * mc(1)}};
        sink.add_element_angle(e, area * ddot(stress, de));
        sink.add_grad_m(e, area * grad_m);
      }
      continue;
    }

    // exp(eps e(F, m o y)) = exp(eps E(M)) since m o y = M / det F.
    const MagneticStretch stretch = magnetic_stretch(mc, eps);
    const Mat2 x = stretch.value * f[e];
    const double scale = area / (eps * eps);
    if (sink.active()) {
      const PhiEvaluation phi = ctx.model().phi_with_gradient(x);
      elastic += scale * phi.value;
      sink.add_grad_u(e, eps * scale * stretch.value.transpose() * phi.gradient);
      sink.add_element_angle(e, scale * ddot(phi.gradient, stretch.d_angle * f[e]));
      const ExchangeElement ex = exchange_element(grad_m, f[e], area);
      exchange += ex.value;
      sink.add_grad_u(e, eps * ex.d_f);
      sink.add_grad_m(e, ex.d_g);
    } else {
      elastic += scale * ctx.model().phi(x);
      exchange += exchange_element(grad_m, f[e], area).value;
    }
  }

  report.elastic = static_cast<double>(elastic);
  report.exchange = static_cast<double>(exchange);

  if (ctx.magnetostatics().mu0 > 0.0) {
    Rasterization raster;
    try {
      raster = rasterize_pushforward(grid, state, eps, ctx.box(), sink.active());
    } catch (const Inadmissible&) {
      report.admissible = false;
      report.total = kInfinity;
      return report;
    }
    const Potential pot = ctx.solver().solve(raster.field);
    report.cg_iterations = pot.iterations;
    report.magnetostatic = demag_energy(pot.v, raster.field, ctx.magnetostatics().mu0, ctx.box());
    if (sink.active()) {
      // f_c = sum over fragments of (area / h^2) m_e, with m_e = M_e / det F_e.
      const CellField g = demag_source_gradient(pot.v, ctx.box());
      const double inv_cell_area = 1.0 / (ctx.box().spacing() * ctx.box().spacing());
      std::vector<Vec2> d_m(grid.num_elements(), Vec2::Zero());
      std::vector<Eigen::Matrix<double, 6, 1>> d_vertices(
          grid.num_elements(), Eigen::Matrix<double, 6, 1>::Zero());
      for (const CellFragment& frag : raster.fragments) {
        const Vec2 gc = g.col(frag.cell) * inv_cell_area;
        d_m[frag.element] += frag.area * gc;
        d_vertices[frag.element] += gc.dot(raster.element_field[frag.element]) * frag.d_area;
      }
      for (int e = 0; e < grid.num_elements(); ++e) {
        const Vec2& s = d_m[e];
        const MagnetizationVector mc = element_magnetization(grid, state, e);
        const double det = determinant(f[e]);
        if (!obj.is_limit()) {
          sink.add_grad_u(e, eps * (-s.dot(mc) / (det * det)) * cofactor(f[e]));
          const auto& tri = grid.elements[e];
          for (int a = 0; a < 3; ++a) {
            full(2 * tri[a]) += eps * d_vertices[e](2 * a);
            full(2 * tri[a] + 1) += eps * d_vertices[e](2 * a + 1);
          }
        }
        sink.add_element_angle(e, s.dot(perp(mc)) / det);
      }
    }
  }

  if (ctx.loads()) {
    const LoadValues lv = loads_eval(grid, state, eps, *ctx.loads());
    report.load_work = lv.load_work;
    report.zeeman = lv.zeeman;
    if (with_gradient) full -= lv.gradient_load_work + lv.gradient_zeeman;
  }

  report.total =
      report.elastic + report.exchange + report.magnetostatic - report.load_work - report.zeeman;
  if (with_gradient) report.gradient = ctx.dofs().restrict_gradient(full);
  return report;
}

EnergyReport energy_G_eps(const EnergyContext& ctx, const StateFields& state, double eps,
                          bool with_gradient) {
  if (!(eps > 0.0)) throw DomainError("energy_G_eps: eps must be positive");
  EnergyReport report = evaluate(ctx, state, Objective::nonlinear(eps), with_gradient);
  if (!report.admissible) {
    throw Inadmissible("energy_G_eps: state is not admissible at eps = " + std::to_string(eps),
                       report.bad_elements);
  }
  return report;
}

EnergyReport energy_G0(const EnergyContext& ctx, const StateFields& state, bool with_gradient) {
  return evaluate(ctx, state, Objective::limit(), with_gradient);
}

AdmissibilityReport admissibility(const GridSpec& grid, const StateFields& state, double eps,
                                  double ciarlet_constant) {
  AdmissibilityReport r;
  r.min_det = kInfinity;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const Mat2 grad_u = element_gradient(grid, state.u, e);
    const double det = determinant(Mat2::Identity() + eps * grad_u);
    const double opn = eps * operator_norm(grad_u);
    r.min_det = std::min(r.min_det, det);
    r.max_opnorm_eps_grad_u = std::max(r.max_opnorm_eps_grad_u, opn);
    if (opn < 1.0 && !(det > 0.0)) ++r.implication_violations;
  }
  r.all_positive = r.min_det > 0.0;
  r.ciarlet_pointwise = r.max_opnorm_eps_grad_u < 1.0;
  r.ciarlet_global_hint = r.max_opnorm_eps_grad_u < ciarlet_constant;
  return r;
}

}  // namespace magel
