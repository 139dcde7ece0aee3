#include "magel/minimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "magel/errors.hpp"

namespace magel {

std::string SolverStats::status() const {
  if (converged) return "converged";
  if (line_search_failure) return "line-search-failure";
  return "max-iterations";
}

namespace {

constexpr double kRoundoff = 1e-12;

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& history, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(history.size());
  for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  if (!history.empty()) {
    const Pair& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  } else {
    q /= std::max(1.0, g.lpNorm<Eigen::Infinity>());
  }
  for (size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return -q;
}

}  // namespace

Eigen::VectorXd lbfgs(const ObjectiveFunction& fn, Eigen::VectorXd x, const SolverOptions& opts,
                      SolverStats& stats) {
  stats = SolverStats{};
  Eigen::VectorXd g(x.size());
  double f = fn(x, &g);
  ++stats.evaluations;
  if (!std::isfinite(f)) throw Inadmissible("lbfgs: initial point is infeasible", {});
  stats.energy_trace.push_back(f);

  std::deque<Pair> history;
  Eigen::VectorXd g_trial(x.size());
  while (true) {
    stats.grad_norm = g.lpNorm<Eigen::Infinity>();
    if (stats.grad_norm < opts.tol) {
      stats.converged = true;
      break;
    }
    if (stats.iterations >= opts.max_iter) break;

    Eigen::VectorXd d = two_loop(history, g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      history.clear();
      d = two_loop(history, g);
      slope = g.dot(d);
    }

    bool accepted = false;
    double f_trial = 0.0;
    Eigen::VectorXd x_trial;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double t = 1.0;
      for (int k = 0; k <= opts.max_backtracks; ++k) {
        x_trial = x + t * d;
        f_trial = fn(x_trial, &g_trial);
        ++stats.evaluations;
        if (std::isfinite(f_trial) && f_trial <= f + opts.armijo * t * slope) {
          accepted = true;
          break;
        }
        // Near a minimizer the Armijo decrease drops below the rounding error
        // of f. Fall back to the approximate Wolfe test of Hager and Zhang on
        // the exact directional derivative, still requiring f not to grow.
        if (std::isfinite(f_trial) && f_trial <= f &&
            std::abs(f_trial - f) <= kRoundoff * std::abs(f) &&
            g_trial.dot(d) <= (1.0 - 2.0 * opts.armijo) * std::abs(slope)) {
          accepted = true;
          break;
        }
        t *= opts.backtrack;
      }
      if (!accepted && !history.empty()) {
        // Retry once along the scaled steepest-descent direction.
        history.clear();
        d = two_loop(history, g);
        slope = g.dot(d);
      } else {
        break;
      }
    }
    if (!accepted) {
      stats.line_search_failure = true;
      break;
    }

    Pair pair{x_trial - x, g_trial - g, 0.0};
    const double sy = pair.s.dot(pair.y);
    x = x_trial;
    f = f_trial;
    g = g_trial;
    ++stats.iterations;
    stats.energy_trace.push_back(f);
    if (sy > 1e-16 * pair.s.norm() * pair.y.norm() && sy > 0.0) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    }
  }
  return x;
}

MinimizeResult minimize(const EnergyContext& ctx, const Objective& obj, const StateFields& init,
                        const SolverOptions& opts) {
  const EnergyReport start = evaluate(ctx, init, obj, false);
  if (!start.admissible) {
    throw Inadmissible("minimize: initial state is not admissible", start.bad_elements);
  }
  StateFields work = init;
  const DofMap& dofs = ctx.dofs();
  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    dofs.scatter(x, work);
    EnergyReport r = evaluate(ctx, work, obj, grad != nullptr);
    if (grad != nullptr && r.admissible) *grad = std::move(r.gradient);
    return r.total;
  };
  MinimizeResult result;
  const Eigen::VectorXd x = lbfgs(fn, dofs.gather(init), opts, result.stats);
  result.state = init;
  dofs.scatter(x, result.state);
  result.report = evaluate(ctx, result.state, obj, true);
  return result;
}

StateFields default_initial_state(const GridSpec& grid, const BoundaryDatum& w) {
  StateFields state = apply_dirichlet(grid, StateFields::zeros(grid), w);
  const int n = grid.n;
  const Eigen::Matrix2Xd u0 = state.u;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = j * n + i;
      if (grid.on_gamma[k]) continue;
      Vec2 sum = Vec2::Zero();
      int count = 0;
      if (i > 0) sum += u0.col(k - 1), ++count;
      if (i + 1 < n) sum += u0.col(k + 1), ++count;
      if (j > 0) sum += u0.col(k - n), ++count;
      if (j + 1 < n) sum += u0.col(k + n), ++count;
      state.u.col(k) = sum / count;
    }
  }
  return state;
}

}  // namespace magel
