#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "magel/energy.hpp"

namespace magel {

struct SolverOptions {
  double tol = 1e-8;  ///< on the infinity norm of the free gradient
  int max_iter = 5000;
  int memory = 10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct SolverStats {
  int iterations = 0;
  int evaluations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool line_search_failure = false;
  std::vector<double> energy_trace;  ///< objective after each accepted step, starting at x0

  /// "converged", "line-search-failure" or "max-iterations".
  std::string status() const;
};

/// f(x, grad) returns the objective and fills grad when non-null. Infinite or
/// NaN values mark infeasible points and are rejected by the line search.
using ObjectiveFunction = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

/// Limited-memory BFGS with Armijo backtracking. Returns the best iterate.
Eigen::VectorXd lbfgs(const ObjectiveFunction& fn, Eigen::VectorXd x0, const SolverOptions& opts,
                      SolverStats& stats);

struct MinimizeResult {
  StateFields state;
  SolverStats stats;
  EnergyReport report;
};

/// Minimizes the objective over the free dofs of `ctx` starting from `init`.
/// Throws Inadmissible when `init` is not admissible.
MinimizeResult minimize(const EnergyContext& ctx, const Objective& obj, const StateFields& init,
                        const SolverOptions& opts);

/// Default initial state: u = w on Gamma, one Jacobi sweep of the graph
/// Laplacian on the other nodes starting from zero, phi = 0.
StateFields default_initial_state(const GridSpec& grid, const BoundaryDatum& w);

}  // namespace magel
