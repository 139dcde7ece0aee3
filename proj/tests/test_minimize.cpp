#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "magel/errors.hpp"
#include "magel/minimize.hpp"
#include "test_util.hpp"

using namespace magel;
using testutil::context;

TEST_CASE("lbfgs minimizes the Rosenbrock function") {
  auto rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double a = 1 - x(0), b = x(1) - x(0) * x(0);
    if (g) *g = Eigen::Vector2d(-2 * a - 400 * x(0) * b, 200 * b);
    return a * a + 100 * b * b;
  };
  SolverStats st;
  const Eigen::VectorXd x = lbfgs(rosen, Eigen::Vector2d(-1.2, 1.0), {}, st);
  CHECK(st.converged);
  CHECK(st.status() == "converged");
  CHECK((x - Eigen::Vector2d(1, 1)).norm() < 1e-7);
  for (size_t i = 1; i < st.energy_trace.size(); ++i)
    CHECK(st.energy_trace[i] <= st.energy_trace[i - 1]);
}

TEST_CASE("lbfgs rejects infeasible trial points") {
  // minimum of (x - 2)^2 lies outside the feasible set x < 1
  auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (x(0) >= 1.0) return kInfinity;
    if (g) *g = Eigen::VectorXd::Constant(1, 2 * (x(0) - 2) + 1e-3 / ((1 - x(0)) * (1 - x(0))));
    return (x(0) - 2) * (x(0) - 2) + 1e-3 / (1 - x(0));
  };
  SolverStats st;
  const Eigen::VectorXd x = lbfgs(fn, Eigen::VectorXd::Zero(1), {}, st);
  CHECK(x(0) < 1.0);
  CHECK(std::isfinite(st.energy_trace.back()));
  CHECK_THROWS_AS(lbfgs(fn, Eigen::VectorXd::Constant(1, 3.0), {}, st), Inadmissible);
}

TEST_CASE("max_iter stops and flags the run") {
  auto quad = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(x.size(), 1, 100);
    if (g) *g = w.cwiseProduct(x);
    return 0.5 * x.dot(w.cwiseProduct(x));
  };
  SolverOptions o;
  o.max_iter = 3;
  SolverStats st;
  lbfgs(quad, Eigen::VectorXd::Ones(50), o, st);
  CHECK(st.iterations == 3);
  CHECK_FALSE(st.converged);
  CHECK(st.status() == "max-iterations");
}

TEST_CASE("limit problem with frozen angles matches a direct linear solve") {
  LoadSpec loads{LoadField::constant(Vec2(0.3, -0.2)), LoadField::constant(Vec2(0.1, 0.0))};
  const EnergyContext ctx = context(9, 64, 1.0, loads, true);
  const BoundaryDatum w{BoundaryDatum::Kind::kShear, 0.1};
  StateFields init = default_initial_state(ctx.grid(), w);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < ctx.grid().num_nodes(); ++k) init.phi(k) = u(rng);

  // quadratic: Hessian columns are exact gradient differences
  const DofMap& dofs = ctx.dofs();
  const Eigen::VectorXd x0 = dofs.gather(init);
  const int m = dofs.num_free();
  const Eigen::VectorXd g0 = energy_G0(ctx, init).gradient;
  Eigen::MatrixXd hess(m, m);
  for (int i = 0; i < m; ++i) {
    StateFields s = init;
    Eigen::VectorXd x = x0;
    x(i) += 1.0;
    dofs.scatter(x, s);
    hess.col(i) = energy_G0(ctx, s).gradient - g0;
  }
  hess = 0.5 * (hess + hess.transpose());
  const Eigen::VectorXd step = hess.ldlt().solve(-g0);
  StateFields direct = init;
  dofs.scatter(x0 + step, direct);
  const double direct_residual = energy_G0(ctx, direct).gradient.lpNorm<Eigen::Infinity>();
  CHECK(direct_residual < 1e-7);

  const MinimizeResult r = minimize(ctx, Objective::limit(), init, {});
  CHECK(r.stats.converged);
  CHECK(r.report.gradient.lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK((dofs.gather(r.state) - (x0 + step)).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(r.state.phi == init.phi);
}

TEST_CASE("limit descent from the undeformed state") {
  const EnergyContext ctx = context(9, 32, 0.0);
  StateFields init = StateFields::zeros(ctx.grid());
  const double e_init = energy_G0(ctx, init, false).elastic;
  const MinimizeResult r = minimize(ctx, Objective::limit(), init, {});
  CHECK(r.stats.converged);
  CHECK(r.report.elastic <= e_init);
  for (size_t i = 1; i < r.stats.energy_trace.size(); ++i)
    CHECK(r.stats.energy_trace[i] <= r.stats.energy_trace[i - 1]);
}

TEST_CASE("nonlinear descent, determinism and the coercivity bound") {
  const LoadSpec loads{LoadField::constant(Vec2::Zero()), LoadField::constant(Vec2(0.1, 0.0))};
  const EnergyContext ctx = context(9, 64, 1.0, loads);
  const BoundaryDatum w{BoundaryDatum::Kind::kUniaxialStretch, 0.1};
  const StateFields init = default_initial_state(ctx.grid(), w);
  const double eps = 0.1;
  SolverOptions o;
  o.max_iter = 400;
  const MinimizeResult a = minimize(ctx, Objective::nonlinear(eps), init, o);
  const MinimizeResult b = minimize(ctx, Objective::nonlinear(eps), init, o);
  CHECK(a.stats.energy_trace == b.stats.energy_trace);
  CHECK(a.state.u == b.state.u);
  CHECK(a.state.phi == b.state.phi);
  for (size_t i = 1; i < a.stats.energy_trace.size(); ++i)
    CHECK(a.stats.energy_trace[i] <= a.stats.energy_trace[i - 1]);
  CHECK(a.report.total <= energy_G_eps(ctx, init, eps, false).total);
  // f = 0 and |M| = 1: G = F + M <= F + sup|h| |Omega|
  const double sup_h = ctx.loads()->h.sup_norm(-1, 2);
  const EnergyContext bare = ctx.without_loads();
  for (const StateFields* s : {&init, &a.state}) {
    const double g = energy_G_eps(bare, *s, eps, false).total;
    const double f = energy_G_eps(ctx, *s, eps, false).total;
    CHECK(g <= f + sup_h * (1 + std::sqrt(g)));
  }
}

TEST_CASE("minimize refuses an inadmissible start") {
  const EnergyContext ctx = context(5, 32, 0.0);
  StateFields s = StateFields::zeros(ctx.grid());
  for (int k = 0; k < ctx.grid().num_nodes(); ++k)
    s.u.col(k) = Vec2(-3.0 * ctx.grid().nodes[k].x(), 0.0);
  CHECK_THROWS_AS(minimize(ctx, Objective::nonlinear(1.0), s, {}), Inadmissible);
}

TEST_CASE("default initial state meets the datum") {
  const GridSpec g = build_grid(7, BoundarySelector::kLeftEdge);
  const BoundaryDatum w{BoundaryDatum::Kind::kShear, 0.2};  // nonzero on the left edge
  const StateFields s = default_initial_state(g, w);
  for (int k = 0; k < g.num_nodes(); ++k) {
    if (g.on_gamma[k]) CHECK((s.u.col(k) - w.value(g.nodes[k])).norm() == 0.0);
    CHECK(s.phi(k) == 0.0);
  }
  // the Jacobi sweep touches only the first interior column
  CHECK(s.u.col(1 * 7 + 1).norm() > 0.0);
  CHECK(s.u.col(3 * 7 + 3).norm() == 0.0);
}
