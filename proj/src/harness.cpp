#include "magel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "magel/errors.hpp"

namespace magel {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Distances between states

double h1_distance(const GridSpec& grid, const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b) {
  const Eigen::Matrix2Xd d = a - b;
  double sum = 0.0;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const auto& tri = grid.elements[e];
    // Edge-midpoint rule is exact for the quadratic |d|^2.
    double l2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      l2 += (0.5 * (d.col(tri[k]) + d.col(tri[(k + 1) % 3]))).squaredNorm();
    }
    sum += grid.areas[e] * (l2 / 3.0 + element_gradient(grid, d, e).squaredNorm());
  }
  return std::sqrt(sum);
}

double pushed_magnetization_distance(const GridSpec& grid, const StateFields& a, double eps_a,
                                     const StateFields& b, double eps_b, const BoxGrid& box) {
  const Rasterization ra = rasterize_pushforward(grid, a, eps_a, box);
  const Rasterization rb = rasterize_pushforward(grid, b, eps_b, box);
  return cell_l2_norm(ra.field - rb.field, box);
}

// ---------------------------------------------------------------------------
// Sweep

const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols = {
      "eps",     "s_eps",     "s0",        "gap",     "elastic",    "exchange",  "magnetostatic",
      "load_work", "zeeman", "u_h1_dist", "m_l2_dist", "min_det", "iterations", "converged"};
  return cols;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  const auto& cols = sweep_csv_columns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  std::ostringstream line;
  for (const SweepRecord& r : records) {
    line.str("");
    line << std::setprecision(17);
    line << r.eps << ',' << r.s_eps << ',' << r.s0 << ',' << r.gap << ',' << r.elastic << ','
         << r.exchange << ',' << r.magnetostatic << ',' << r.load_work << ',' << r.zeeman << ','
         << r.u_h1_dist << ',' << r.m_l2_dist << ',' << r.min_det << ',' << r.iterations << ','
         << (r.converged ? "true" : "false") << "\n";
    out << line.str();
  }
}

StateFields recovery_initializer(const GridSpec& grid, const StateFields& u0_state, double eps) {
  const AdmissibilityReport adm = admissibility(grid, u0_state, eps);
  if (!adm.all_positive) {
    std::vector<int> bad;
    for (int e = 0; e < grid.num_elements(); ++e) {
      if (!(determinant(deformation_gradient(grid, u0_state, eps, e)) > 0.0)) bad.push_back(e);
    }
    throw Inadmissible("recovery_initializer: eps = " + std::to_string(eps) +
                           " folds the recovery deformation",
                       bad);
  }
  return u0_state;
}

namespace {

SweepRecord solve_point(const EnergyContext& ctx, const Config& config, double eps,
                        const StateFields& init, const StateFields& limit_state, double s0) {
  const MinimizeResult res = minimize(ctx, Objective::nonlinear(eps), init, config.solver);
  SweepRecord r;
  r.eps = eps;
  r.s_eps = res.report.total;
  r.s0 = s0;
  r.gap = std::abs(r.s_eps - s0);
  r.elastic = res.report.elastic;
  r.exchange = res.report.exchange;
  r.magnetostatic = res.report.magnetostatic;
  r.load_work = res.report.load_work;
  r.zeeman = res.report.zeeman;
  r.g_eps = r.elastic + r.exchange + r.magnetostatic;
  r.u_h1_dist = h1_distance(ctx.grid(), res.state.u, limit_state.u);
  r.m_l2_dist =
      pushed_magnetization_distance(ctx.grid(), res.state, eps, limit_state, 0.0, ctx.box());
  r.admissibility = admissibility(ctx.grid(), res.state, eps, config.ciarlet_c);
  r.min_det = r.admissibility.min_det;
  r.overlap_cells = rasterize_pushforward(ctx.grid(), res.state, eps, ctx.box()).overlap_cells;
  r.iterations = res.stats.iterations;
  r.converged = res.stats.converged;
  r.state = res.state;
  return r;
}

}  // namespace

SweepResult run_sweep(const Config& config, bool parallel) {
  const EnergyContext ctx = config.make_context(true);
  const GridSpec& grid = ctx.grid();
  const StateFields cold = default_initial_state(grid, config.boundary);

  SweepResult out;
  const MinimizeResult limit = minimize(ctx, Objective::limit(), cold, config.solver);
  out.limit_state = limit.state;
  out.limit_stats = limit.stats;
  out.limit_report = limit.report;
  const double s0 = limit.report.total;

  const std::vector<double> eps_values = config.sweep.eps_values();
  if (parallel && !config.sweep.warm_start) {
    std::vector<std::future<SweepRecord>> jobs;
    for (double eps : eps_values) {
      jobs.push_back(std::async(std::launch::async, [&config, &out, &cold, eps, s0] {
        const EnergyContext local = config.make_context(true);
        return solve_point(local, config, eps, cold, out.limit_state, s0);
      }));
    }
    for (auto& job : jobs) out.records.push_back(job.get());
    return out;
  }

  StateFields previous = out.limit_state;
  for (double eps : eps_values) {
    StateFields init = cold;
    if (config.sweep.warm_start) {
      try {
        init = recovery_initializer(grid, previous, eps);
        if (!evaluate(ctx, init, Objective::nonlinear(eps), false).admissible) init = cold;
      } catch (const Inadmissible&) {
        init = cold;
      }
    }
    out.records.push_back(solve_point(ctx, config, eps, init, out.limit_state, s0));
    previous = out.records.back().state;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recovery sequence

std::vector<RecoveryPoint> recovery_experiment(const EnergyContext& ctx, const StateFields& u0_state,
                                               const std::vector<double>& eps_values) {
  const EnergyContext unloaded = ctx.without_loads();
  const double g0 = energy_G0(unloaded, u0_state, false).total;
  std::vector<RecoveryPoint> out;
  for (double eps : eps_values) {
    const StateFields rec = recovery_initializer(ctx.grid(), u0_state, eps);
    const double g = energy_G_eps(unloaded, rec, eps, false).total;
    out.push_back({eps, g, g0, std::abs(g - g0)});
  }
  return out;
}

double loglog_slope(const std::vector<RecoveryPoint>& points) {
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double x = std::log(p.eps);
    const double y = std::log(p.gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Rigidity probe

RigiditySample rigidity_ratio(const GridSpec& grid, const Eigen::Matrix2Xd& v, double p) {
  RigiditySample s;
  std::vector<Mat2> grads(grid.num_elements());
  const double area = grid.area_total();
  for (int e = 0; e < grid.num_elements(); ++e) {
    grads[e] = element_gradient(grid, v, e);
    s.mean_gradient += grid.areas[e] * grads[e];
  }
  s.mean_gradient /= area;
  s.rotation = project_SO(s.mean_gradient).matrix();
  s.projection_residual =
      std::abs((s.rotation - s.mean_gradient).norm() - dist_SO(s.mean_gradient));
  for (int e = 0; e < grid.num_elements(); ++e) {
    s.lhs += grid.areas[e] * std::pow((grads[e] - s.rotation).norm(), p);
    s.rhs += grid.areas[e] * g_p(dist_SO(grads[e]), p);
  }
  // both sides at rounding level (dist below ~1e-12 everywhere) count as 0 / 0
  const double zero = 1e-24 * area;
  if (s.rhs <= zero && s.lhs <= zero) {
    s.skipped = true;
    s.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    s.ratio = s.lhs / s.rhs;
  }
  return s;
}

RigidityStats rigidity_probe(int n, double p, int samples, std::uint64_t seed, double amplitude) {
  const GridSpec grid = build_grid(n, BoundarySelector::kLeftEdge);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  constexpr int kModes = 2;

  RigidityStats stats;
  std::vector<double> ratios;
  for (int sample = 0; sample < samples; ++sample) {
    // d(x) = amplitude * sum_{k,l} c_kl cos(pi (k x1 + l x2) + phase_kl) / (k + l)
    std::vector<std::array<double, 4>> modes;
    for (int k = 0; k <= kModes; ++k) {
      for (int l = 0; l <= kModes; ++l) {
        if (k + l == 0) continue;
        modes.push_back({unit(rng) / (k + l), unit(rng) / (k + l), angle(rng), angle(rng)});
      }
    }
    const Mat2 rot = Rotation2::from_angle(angle(rng)).matrix();
    const Vec2 shift(unit(rng), unit(rng));
    Eigen::Matrix2Xd v(2, grid.num_nodes());
    for (int node = 0; node < grid.num_nodes(); ++node) {
      const Vec2& x = grid.nodes[node];
      Vec2 d = Vec2::Zero();
      int idx = 0;
      for (int k = 0; k <= kModes; ++k) {
        for (int l = 0; l <= kModes; ++l) {
          if (k + l == 0) continue;
          const auto& c = modes[idx++];
          const double arg = M_PI * (k * x(0) + l * x(1));
          d += Vec2(c[0] * std::cos(arg + c[2]), c[1] * std::cos(arg + c[3]));
        }
      }
      v.col(node) = rot * (x + amplitude * d) + shift;
    }
    RigiditySample s = rigidity_ratio(grid, v, p);
    if (s.skipped) {
      ++stats.skipped;
    } else {
      if (!std::isfinite(s.ratio)) stats.all_finite = false;
      ratios.push_back(s.ratio);
    }
    stats.max_projection_residual = std::max(stats.max_projection_residual, s.projection_residual);
    stats.samples.push_back(s);
  }
  if (!ratios.empty()) {
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
      return sorted[static_cast<size_t>(std::floor(q * (sorted.size() - 1)))];
    };
    stats.max_ratio = sorted.back();
    stats.mean_ratio = std::accumulate(sorted.begin(), sorted.end(), 0.0) / sorted.size();
    stats.q05 = quantile(0.05);
    stats.q50 = quantile(0.5);
    stats.q95 = quantile(0.95);
  }
  return stats;
}

void write_rigidity_csv(std::ostream& out, const RigidityStats& stats) {
  out << std::setprecision(17);
  out << "sample,lhs,rhs,ratio,skipped,projection_residual\n";
  for (size_t i = 0; i < stats.samples.size(); ++i) {
    const RigiditySample& s = stats.samples[i];
    out << i << ',' << s.lhs << ',' << s.rhs << ',' << s.ratio << ',' << (s.skipped ? 1 : 0)
        << ',' << s.projection_residual << '\n';
  }
  out << "# max_ratio=" << stats.max_ratio << " mean_ratio=" << stats.mean_ratio
      << " q05=" << stats.q05 << " q50=" << stats.q50 << " q95=" << stats.q95
      << " skipped=" << stats.skipped << '\n';
}

// ---------------------------------------------------------------------------
// Hypothesis checks

bool HypothesisReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status != "fail"; });
}

json HypothesisReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  }
  return {{"all_passed", all_passed()}, {"checks", checks_json}};
}

namespace {

json mat_json(const Mat2& m) { return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}; }

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Mat2 rotation() { return Rotation2::from_angle(uniform(-M_PI, M_PI)).matrix(); }
  Vec2 unit_vector() {
    const double t = uniform(-M_PI, M_PI);
    return {std::cos(t), std::sin(t)};
  }
  Mat2 matrix(double scale) {
    return Mat2{{uniform(-scale, scale), uniform(-scale, scale)},
                {uniform(-scale, scale), uniform(-scale, scale)}};
  }
  /// Orientation-preserving F with prescribed determinant.
  Mat2 with_det(double det) {
    const double s1 = std::exp(uniform(-1.0, 1.0)) * std::sqrt(det);
    const Mat2 d{{s1, 0.0}, {0.0, det / s1}};
    return rotation() * d * rotation();
  }
  /// Orientation-preserving F with moderate stretches.
  Mat2 positive() { return with_det(std::exp(uniform(std::log(0.2), std::log(5.0)))); }

 private:
  std::mt19937_64 rng_;
};

// Runs `count` sample predicates; records the worst violation.
template <typename Trial>
CheckResult sampled_check(const std::string& name, int count, Trial&& trial) {
  CheckResult r{name, "pass", json::object()};
  int failures = 0;
  double worst = 0.0;
  json counterexample;
  for (int i = 0; i < count; ++i) {
    json example;
    const double violation = trial(example);
    if (violation > 0.0) {
      ++failures;
      if (violation > worst) {
        worst = violation;
        counterexample = example;
      }
    }
  }
  r.detail["samples"] = count;
  r.detail["failures"] = failures;
  if (failures > 0) {
    r.status = "fail";
    r.detail["worst_violation"] = worst;
    r.detail["counterexample"] = counterexample;
  }
  return r;
}

}  // namespace

HypothesisReport hypothesis_check(const StoredEnergyModel& model, int samples, std::uint64_t seed) {
  HypothesisReport report;
  Sampler rng(seed);
  const double p = model.p();
  const double a = model.a();
  const ElasticityTensor c_closed = model.elasticity();
  const ElasticityTensor c_fd = elasticity_fd_oracle(model);

  report.checks.push_back(sampled_check("frame_indifference", samples, [&](json& ex) {
    const Mat2 f = rng.positive();
    // |m| det F of order one, as under the Heisenberg constraint.
    const Vec2 m = rng.unit_vector() * rng.uniform(0.2, 2.0) / determinant(f);
    const Mat2 q = rng.rotation();
    const double w = W(f, m, model);
    const double wq = W(q * f, q * m, model);
    ex = {{"F", mat_json(f)}, {"m", {m(0), m(1)}}, {"Q", mat_json(q)}, {"W", w}, {"W_QF", wq}};
    return std::abs(w - wq) - 1e-10 * (1.0 + std::abs(w));
  }));

  report.checks.push_back(sampled_check("evenness_in_m", samples, [&](json& ex) {
    const Mat2 f = rng.positive();
    const Vec2 m = rng.unit_vector() * rng.uniform(0.2, 2.0) / determinant(f);
    const double w = W(f, m, model);
    const double wm = W(f, -m, model);
    ex = {{"F", mat_json(f)}, {"m", {m(0), m(1)}}, {"W", w}, {"W_minus", wm}};
    return std::abs(w - wm) - 1e-12 * (1.0 + std::abs(w));
  }));

  report.checks.push_back(sampled_check("zero_on_SO2", samples, [&](json& ex) {
    const Mat2 r = rng.rotation();
    const double v = model.phi(r);
    ex = {{"R", mat_json(r)}, {"Phi", v}};
    return std::abs(v) - 1e-12;
  }));

  report.checks.push_back(sampled_check("growth_lower_bound_g_p", samples, [&](json& ex) {
    const Mat2 f = rng.positive();
    const double v = model.phi(f);
    const double g = g_p(dist_SO(f), p);
    ex = {{"F", mat_json(f)}, {"Phi", v}, {"g_p_dist", g}};
    return g - v;
  }));

  {
    CheckResult r = sampled_check("determinant_blowup", samples, [&](json& ex) {
      const double det = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
      const Mat2 f = rng.with_det(det);
      const double v = model.phi(f);
      const double bound = 0.5 * (std::pow(det, -a) - 1.0);
      ex = {{"F", mat_json(f)}, {"det", det}, {"Phi", v}, {"bound", bound}};
      return bound - v;
    });
    r.detail["constant"] = 0.5;
    report.checks.push_back(r);
  }

  report.checks.push_back(sampled_check("elasticity_coercive_on_sym", samples, [&](json& ex) {
    const Mat2 h = sym(rng.matrix(1.0));
    const double ch = c_closed.contract(h);
    ex = {{"H_sym", mat_json(h)}, {"CH:H", ch}, {"|H|^2", h.squaredNorm()}};
    return h.squaredNorm() - ch - 1e-14;
  }));

  report.checks.push_back(sampled_check("elasticity_sym_reduction", samples, [&](json& ex) {
    const Mat2 h = rng.matrix(1.0);
    const double full = c_closed.contract(h);
    const double reduced = c_closed.contract(sym(h));
    ex = {{"H", mat_json(h)}, {"CH:H", full}, {"CHsym:Hsym", reduced}};
    return std::abs(full - reduced) - 1e-12 * (1.0 + full);
  }));

  report.checks.push_back(sampled_check("elasticity_antisymmetric_null", samples, [&](json& ex) {
    const Mat2 w = skew(rng.matrix(1.0));
    const double closed = c_closed.contract(w);
    const double fd = c_fd.contract(w);
    ex = {{"W", mat_json(w)}, {"closed", closed}, {"fd", fd}};
    return std::max(std::abs(closed), std::abs(fd) - 1e-5 * (1.0 + w.squaredNorm()));
  }));

  {
    // Finite-difference oracle agrees with the closed form.
    const double scale = c_closed.entries.cwiseAbs().maxCoeff();
    const double err = (c_closed.entries - c_fd.entries).cwiseAbs().maxCoeff() / scale;
    CheckResult r{"elasticity_fd_agreement", err <= 1e-5 ? "pass" : "fail",
                  {{"relative_error", err}}};
    report.checks.push_back(r);
  }

  {
    double kappa = 0.0;
    CheckResult r = sampled_check("taylor_cubic_remainder", samples, [&](json& ex) {
      Mat2 h = rng.matrix(1.0);
      h *= rng.uniform(1e-3, 0.1) / h.norm();
      const double rem = std::abs(model.phi(Mat2::Identity() + h) - 0.5 * c_closed.contract(h));
      const double k = rem / std::pow(h.norm(), 3);
      kappa = std::max(kappa, k);
      ex = {{"H", mat_json(h)}, {"remainder", rem}, {"kappa", k}};
      return k - kTaylorCubicConstant;
    });
    r.detail["kappa_observed"] = kappa;
    r.detail["kappa_frozen"] = kTaylorCubicConstant;
    report.checks.push_back(r);
  }

  report.checks.push_back(sampled_check("g_p_convexity", samples, [&](json& ex) {
    const double s = rng.uniform(0.0, 3.0);
    const double t = rng.uniform(0.0, 3.0);
    const double l = rng.uniform(0.0, 1.0);
    const double lhs = g_p(l * s + (1 - l) * t, p);
    const double rhs = l * g_p(s, p) + (1 - l) * g_p(t, p);
    ex = {{"s", s}, {"t", t}, {"lambda", l}, {"lhs", lhs}, {"rhs", rhs}};
    return lhs - rhs - 1e-12 * (1.0 + rhs);
  }));

  {
    // (1/2p)(t^p + t^2) <= g_p(t) <= (1/2)(t^p + t^2) on a log grid.
    CheckResult r{"g_p_sandwich", "pass", json::object()};
    int failures = 0;
    const int points = 2000;
    for (int i = 0; i < points; ++i) {
      const double t = std::pow(10.0, -6.0 + 9.0 * i / (points - 1));
      const double g = g_p(t, p);
      const double s = std::pow(t, p) + t * t;
      if (g < s / (2 * p) * (1 - 1e-12) || g > 0.5 * s * (1 + 1e-12)) {
        if (failures++ == 0) r.detail["counterexample"] = {{"t", t}, {"g_p", g}};
      }
    }
    r.detail["grid_points"] = points;
    r.detail["failures"] = failures;
    if (failures) r.status = "fail";
    report.checks.push_back(r);
  }

  {
    // g_p(s + t) <= C (g_p(s) + t^2) over s in [0, 100], t in [0, 1].
    double c = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double s = i == 0 ? 0.0 : std::pow(10.0, -6.0 + 8.0 * (i - 1) / 1999.0);
      for (int k = 0; k <= 600; ++k) {
        const double t = k == 0 ? 0.0 : std::pow(10.0, -6.0 + 6.0 * (k - 1) / 599.0);
        const double den = g_p(s, p) + t * t;
        if (den > 0.0) c = std::max(c, g_p(s + t, p) / den);
      }
    }
    const bool ok = c <= kSubadditivityConstant;
    report.checks.push_back({"g_p_subadditivity",
                             ok ? "pass" : "fail",
                             {{"constant_found", c},
                              {"constant_frozen", kSubadditivityConstant},
                              {"t_range", {0.0, 1.0}},
                              {"s_range", {0.0, 100.0}}}});
  }

  {
    // g_p(C1 t) <= C2 g_p(t): the supremum of the ratio over the grid is finite.
    CheckResult r{"g_p_scaling", "pass", json::object()};
    for (double c1 : {0.5, 2.0, 10.0}) {
      double c2 = 0.0;
      for (int i = 0; i < 5000; ++i) {
        const double t = std::pow(10.0, -6.0 + 9.0 * i / 4999.0);
        c2 = std::max(c2, g_p(c1 * t, p) / g_p(t, p));
      }
      r.detail["C2_for_C1=" + std::to_string(c1).substr(0, 4)] = c2;
      if (!std::isfinite(c2)) r.status = "fail";
    }
    report.checks.push_back(r);
  }

  {
    // The stated bound g_p(t) <= (1/p) min{t^p, t^2} fails at t = 1 for p > 2.
    const double g1 = g_p(1.0, p);
    const bool holds = g1 <= std::min(1.0, 1.0) / p;
    report.checks.push_back({"g_p_min_form_upper_bound",
                             holds ? "pass" : "known-paper-discrepancy",
                             {{"t", 1.0}, {"g_p", g1}, {"bound", 1.0 / p}}});
  }

  report.checks.push_back(sampled_check("magnetically_relaxed_state_is_stress_free", samples,
                                        [&](json& ex) {
    const Vec2 m = rng.unit_vector();
    const Mat2 r = rng.rotation();
    const Mat2 f = mat_exp(-E_of(m)) * r;
    const Vec2 m_eul = m / determinant(f);
    const double w = W(f, m_eul, model);
    ex = {{"M", {m(0), m(1)}}, {"R", mat_json(r)}, {"W", w}};
    return std::abs(w) - 1e-12;
  }));

  return report;
}

}  // namespace magel
