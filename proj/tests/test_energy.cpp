#include <doctest.h>

#include <cmath>
#include <random>

#include "magel/energy.hpp"
#include "magel/errors.hpp"
#include "test_util.hpp"

using namespace magel;
using testutil::context;

using testutil::fd_check;
using testutil::smooth_state;

TEST_CASE("dof map gathers and scatters the free entries") {
  const GridSpec g = build_grid(4, BoundarySelector::kLeftEdge);
  const DofMap d(g);
  CHECK(d.num_full() == 3 * 16);
  CHECK(d.num_free() == 2 * 12 + 16);
  CHECK(DofMap(g, true).num_free() == 2 * 12);
  std::mt19937_64 rng(1);
  StateFields s = testutil::random_state(g, rng, 1.0);
  StateFields t = StateFields::zeros(g);
  d.scatter(d.gather(s), t);
  for (int k = 0; k < g.num_nodes(); ++k) {
    CHECK(t.phi(k) == s.phi(k));
    if (g.on_gamma[k]) CHECK(t.u.col(k).norm() == 0.0);
    else CHECK(t.u.col(k) == s.u.col(k));
  }
}

TEST_CASE("analytic gradients match central differences on 20 random states") {
  std::mt19937_64 rng(20);
  const EnergyContext ctx = context(9, 64, 1.0, testutil::bumpy_loads());
  const EnergyContext bare = ctx.without_loads();
  const double eps = 0.2;
  double worst_eps = 0, worst_0 = 0, worst_l = 0, worst_m = 0;
  int states = 0;
  while (states < 20) {
    const StateFields s = smooth_state(ctx.grid(), rng);
    if (!admissibility(ctx.grid(), s, eps).all_positive) continue;
    ++states;

    const EnergyReport ge = energy_G_eps(bare, s, eps);
    worst_eps = std::max(worst_eps, fd_check(bare, s, ge.gradient, [&](const StateFields& x) {
                           return energy_G_eps(bare, x, eps, false).total;
                         }, rng, 25).worst);
    const EnergyReport g0 = energy_G0(bare, s);
    worst_0 = std::max(worst_0, fd_check(bare, s, g0.gradient, [&](const StateFields& x) {
                         return energy_G0(bare, x, false).total;
                       }, rng, 25).worst);

    const LoadValues lv = loads_eval(ctx.grid(), s, eps, *ctx.loads());
    const Eigen::VectorXd gl = ctx.dofs().restrict_gradient(lv.gradient_load_work);
    const Eigen::VectorXd gm = ctx.dofs().restrict_gradient(lv.gradient_zeeman);
    worst_l = std::max(worst_l, fd_check(ctx, s, gl, [&](const StateFields& x) {
                         return loads_eval(ctx.grid(), x, eps, *ctx.loads()).load_work;
                       }, rng, 25).worst);
    worst_m = std::max(worst_m, fd_check(ctx, s, gm, [&](const StateFields& x) {
                         return loads_eval(ctx.grid(), x, eps, *ctx.loads()).zeeman;
                       }, rng, 25).worst);

    // the loaded total carries -L - M
    const EnergyReport fe = energy_G_eps(ctx, s, eps);
    CHECK(fe.total == doctest::Approx(ge.total - lv.load_work - lv.zeeman).epsilon(1e-12));
    CHECK((fe.gradient - (ge.gradient - gl - gm)).norm() <= 1e-10 * fe.gradient.norm());
  }
  MESSAGE("worst relative FD error: G_eps " << worst_eps << "  G_0 " << worst_0 << "  L "
                                            << worst_l << "  M " << worst_m);
  CHECK(worst_eps < 1e-5);
  CHECK(worst_0 < 1e-5);
  CHECK(worst_l < 1e-5);
  CHECK(worst_m < 1e-5);
}

TEST_CASE("report total is the signed sum of the terms") {
  std::mt19937_64 rng(8);
  const EnergyContext ctx = context(9, 64, 1.0, testutil::bumpy_loads());
  const StateFields s = smooth_state(ctx.grid(), rng);
  for (const Objective& obj : {Objective::nonlinear(0.1), Objective::limit()}) {
    const EnergyReport r = evaluate(ctx, s, obj);
    CHECK(r.admissible);
    CHECK(r.total == doctest::Approx(r.elastic + r.exchange + r.magnetostatic - r.load_work -
                                     r.zeeman).epsilon(1e-14));
    CHECK(r.magnetostatic >= 0.0);
  }
}

TEST_CASE("limit energy at u = 0 with constant M is 1/4") {
  const EnergyContext ctx = context(5, 32, 0.0);
  StateFields s = StateFields::zeros(ctx.grid());
  for (double phi : {0.0, 0.3, 2.0}) {
    s.phi.setConstant(phi);
    const EnergyReport r = energy_G0(ctx, s);
    CHECK(r.elastic == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(r.exchange == 0.0);
    CHECK(r.magnetostatic == 0.0);
  }
}

TEST_CASE("zero-stress strain gives zero limit elastic energy") {
  const EnergyContext ctx = context(5, 32, 0.0);
  StateFields s = StateFields::zeros(ctx.grid());
  const double phi = 0.8;
  s.phi.setConstant(phi);
  const Mat2 e = E_of(Vec2(std::cos(phi), std::sin(phi)));
  for (int k = 0; k < ctx.grid().num_nodes(); ++k) s.u.col(k) = -e * ctx.grid().nodes[k];
  const EnergyReport r = energy_G0(ctx, s);
  CHECK(std::abs(r.elastic) <= 1e-14);
  // adding a skew part changes nothing
  for (int k = 0; k < ctx.grid().num_nodes(); ++k)
    s.u.col(k) += Mat2{{0, -0.3}, {0.3, 0}} * ctx.grid().nodes[k];
  CHECK(std::abs(energy_G0(ctx, s).elastic) <= 1e-14);
}

TEST_CASE("limit energy is quadratic in u for fixed angles") {
  std::mt19937_64 rng(4);
  const EnergyContext ctx = context(7, 32, 1.0);
  const StateFields a = smooth_state(ctx.grid(), rng);
  StateFields b = a;
  const StateFields d = smooth_state(ctx.grid(), rng);
  auto at = [&](double t) {
    StateFields s = a;
    s.u += t * d.u;
    return energy_G0(ctx, s, false).total;
  };
  // second differences are constant, third vanish
  const double f0 = at(0), f1 = at(1), f2 = at(2), f3 = at(3);
  CHECK(std::abs(f3 - 3 * f2 + 3 * f1 - f0) <= 1e-12 * std::abs(f0));
}

TEST_CASE("rescaled energy at u = 0 decreases to the limit value") {
  const EnergyContext ctx = context(5, 32, 0.0);
  StateFields s = StateFields::zeros(ctx.grid());
  s.phi.setConstant(0.4);
  const Mat2 e = E_of(Vec2(std::cos(0.4), std::sin(0.4)));
  double prev = kInfinity;
  for (double eps : {0.8, 0.4, 0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const EnergyReport r = energy_G_eps(ctx, s, eps);
    const double direct = ctx.model().phi(mat_exp(eps * e)) / (eps * eps);
    CHECK(r.total == doctest::Approx(direct).epsilon(1e-12));
    CHECK(r.total > 0.0);
    CHECK(r.total < prev);
    prev = r.total;
  }
  CHECK(prev == doctest::Approx(0.25).epsilon(1e-2));
}

TEST_CASE("elastic Taylor remainder is first order in eps") {
  const EnergyContext ctx = context(9, 32, 0.0);
  const BoundaryDatum w{BoundaryDatum::Kind::kBending, 0.2};
  StateFields s = StateFields::zeros(ctx.grid());
  for (int k = 0; k < ctx.grid().num_nodes(); ++k) s.u.col(k) = w.value(ctx.grid().nodes[k]);
  s.phi.setConstant(0.3);
  const double lim = energy_G0(ctx, s, false).elastic;
  std::vector<double> le, lg;
  for (double eps : {0.1, 0.05, 0.025}) {
    le.push_back(std::log(eps));
    lg.push_back(std::log(std::abs(energy_G_eps(ctx, s, eps, false).elastic - lim)));
  }
  const double mx = (le[0] + le[1] + le[2]) / 3, my = (lg[0] + lg[1] + lg[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (le[i] - mx) * (lg[i] - my);
    sxx += (le[i] - mx) * (le[i] - mx);
  }
  MESSAGE("Taylor slope " << sxy / sxx);
  CHECK(sxy / sxx >= 1.0 - 1e-3);
}

TEST_CASE("inadmissible states") {
  const EnergyContext ctx = context(5, 32, 1.0);
  StateFields s = StateFields::zeros(ctx.grid());
  for (int k = 0; k < ctx.grid().num_nodes(); ++k)
    s.u.col(k) = Vec2(-3.0 * ctx.grid().nodes[k].x(), 0.0);
  CHECK_THROWS_AS(energy_G_eps(ctx, s, 1.0), Inadmissible);
  const EnergyReport r = evaluate(ctx, s, Objective::nonlinear(1.0));
  CHECK_FALSE(r.admissible);
  CHECK(r.total == kInfinity);
  CHECK(r.bad_elements.size() == static_cast<size_t>(ctx.grid().num_elements()));
  // the limit energy has no orientation constraint
  CHECK(std::isfinite(energy_G0(ctx, s).total));
}

TEST_CASE("loads: examples") {
  const GridSpec g = build_grid(9, BoundarySelector::kLeftEdge);
  std::mt19937_64 rng(6);
  const StateFields s = testutil::random_state(g, rng, 0.2);
  const LoadSpec none{LoadField::constant(Vec2::Zero()), LoadField::constant(Vec2::Zero())};
  const LoadValues z = loads_eval(g, s, 0.3, none);
  CHECK(z.load_work == 0.0);
  CHECK(z.zeeman == 0.0);

  // constant h: M = h . int M
  const Vec2 h(0.3, -0.7);
  const LoadSpec hc{LoadField::constant(Vec2::Zero()), LoadField::constant(h)};
  Vec2 int_m = Vec2::Zero();
  for (int e = 0; e < g.num_elements(); ++e) {
    Vec2 mean = Vec2::Zero();
    for (int a : g.elements[e]) mean += s.magnetization(a);
    int_m += g.areas[e] * mean / 3.0;
  }
  for (double eps : {0.0, 0.1, 0.5}) CHECK(loads_eval(g, s, eps, hc).zeeman == doctest::Approx(h.dot(int_m)).epsilon(1e-13));

  // constant f: L = f . int u
  const Vec2 f(1.5, 0.25);
  Vec2 int_u = Vec2::Zero();
  for (int e = 0; e < g.num_elements(); ++e) {
    Vec2 mean = Vec2::Zero();
    for (int a : g.elements[e]) mean += s.u.col(a);
    int_u += g.areas[e] * mean / 3.0;
  }
  const LoadSpec fc{LoadField::constant(f), LoadField::constant(Vec2::Zero())};
  CHECK(loads_eval(g, s, 0.2, fc).load_work == doctest::Approx(f.dot(int_u)).epsilon(1e-13));

  // eps = 0 against a finer independent quadrature of int h . M
  const LoadSpec bump = testutil::bumpy_loads();
  double fine = 0.0;
  const int q = 40;
  for (int e = 0; e < g.num_elements(); ++e) {
    const auto& el = g.elements[e];
    for (int b = 0; b < q; ++b)
      for (int a = 0; a + b < q; ++a) {
        // centroid rule on a q x q subdivision of the element
        const double l1 = (a + 1.0 / 3) / q, l2 = (b + 1.0 / 3) / q;
        const double l0 = 1 - l1 - l2;
        const Vec2 x = l0 * g.nodes[el[0]] + l1 * g.nodes[el[1]] + l2 * g.nodes[el[2]];
        const Vec2 m = l0 * s.magnetization(el[0]) + l1 * s.magnetization(el[1]) +
                       l2 * s.magnetization(el[2]);
        fine += bump.h(x).dot(m) * g.areas[e] / (q * q);
        if (a + b < q - 1) {
          const double k1 = (a + 2.0 / 3) / q, k2 = (b + 2.0 / 3) / q;
          const double k0 = 1 - k1 - k2;
          const Vec2 xx = k0 * g.nodes[el[0]] + k1 * g.nodes[el[1]] + k2 * g.nodes[el[2]];
          const Vec2 mm = k0 * s.magnetization(el[0]) + k1 * s.magnetization(el[1]) +
                          k2 * s.magnetization(el[2]);
          fine += bump.h(xx).dot(mm) * g.areas[e] / (q * q);
        }
      }
  }
  MESSAGE("zeeman three-point " << loads_eval(g, s, 0.0, bump).zeeman << " fine " << fine);
  CHECK(loads_eval(g, s, 0.0, bump).zeeman == doctest::Approx(fine).epsilon(1e-3));
}

TEST_CASE("admissibility report") {
  const GridSpec g = build_grid(9, BoundarySelector::kLeftEdge);
  StateFields s = StateFields::zeros(g);
  AdmissibilityReport a = admissibility(g, s, 0.3);
  CHECK(a.min_det == 1.0);
  CHECK(a.all_positive);
  CHECK(a.ciarlet_pointwise);
  CHECK(a.ciarlet_global_hint);
  CHECK(a.implication_violations == 0);

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1, 1);
  int pointwise = 0;
  for (int t = 0; t < 200; ++t) {
    const StateFields r = testutil::random_state(g, rng, 0.02);
    const AdmissibilityReport ar = admissibility(g, r, 1.0);
    CHECK(ar.implication_violations == 0);
    CHECK(ar.all_positive == (ar.min_det > 0.0));
    if (ar.ciarlet_pointwise) {
      ++pointwise;
      CHECK(ar.all_positive);
    }
  }
  CHECK(pointwise > 0);

  // a fold: flip the x direction
  for (int k = 0; k < g.num_nodes(); ++k) s.u.col(k) = Vec2(-2.5 * g.nodes[k].x(), 0.0);
  a = admissibility(g, s, 1.0);
  CHECK_FALSE(a.all_positive);
  CHECK(a.min_det == doctest::Approx(-1.5));
  CHECK_FALSE(a.ciarlet_pointwise);
  CHECK(admissibility(g, s, 0.1).all_positive);
}
