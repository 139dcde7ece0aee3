#pragma once

// Discrete energies G_eps, G_0 and their loaded versions F = G - L - M, with
// exact gradients over the free degrees of freedom.

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

#include "magel/energy_model.hpp"
#include "magel/fields.hpp"
#include "magel/loads.hpp"
#include "magel/magnetostatics.hpp"

namespace magel {

/// Degrees of freedom: u at nodes off Gamma (two per node) and phi at every
/// node unless frozen. The full layout is [u_x0, u_y0, u_x1, ..., phi_0, ...].
class DofMap {
 public:
  DofMap(const GridSpec& grid, bool freeze_phi = false);

  int num_free() const { return static_cast<int>(free_.size()); }
  int num_full() const { return num_full_; }
  bool phi_frozen() const { return phi_frozen_; }
  const std::vector<int>& free_indices() const { return free_; }

  Eigen::VectorXd gather(const StateFields& state) const;
  /// Writes the free values into `state`, leaving fixed entries untouched.
  void scatter(const Eigen::VectorXd& x, StateFields& state) const;
  Eigen::VectorXd restrict_gradient(const Eigen::VectorXd& full) const;

 private:
  int num_nodes_;
  int num_full_;
  bool phi_frozen_;
  std::vector<int> free_;
};

struct EnergyReport {
  double elastic = 0.0;
  double exchange = 0.0;
  double magnetostatic = 0.0;
  double load_work = 0.0;
  double zeeman = 0.0;
  double total = 0.0;
  Eigen::VectorXd gradient;  ///< over free dofs; empty if not requested or inadmissible
  bool admissible = true;
  std::vector<int> bad_elements;  ///< elements with det F <= 0
  int cg_iterations = 0;
};

/// Everything an energy evaluation needs besides the state.
class EnergyContext {
 public:
  EnergyContext(GridSpec grid, std::shared_ptr<const StoredEnergy> model, BoxGrid box,
                MagnetostaticsOptions magnetostatics, std::optional<LoadSpec> loads = {},
                bool freeze_phi = false);

  const GridSpec& grid() const { return grid_; }
  const StoredEnergy& model() const { return *model_; }
  std::shared_ptr<const StoredEnergy> model_ptr() const { return model_; }
  const BoxGrid& box() const { return solver_->box(); }
  const MagnetostaticsOptions& magnetostatics() const { return solver_->options(); }
  const std::optional<LoadSpec>& loads() const { return loads_; }
  const DofMap& dofs() const { return dofs_; }
  const PotentialSolver& solver() const { return *solver_; }
  const ElasticityTensor& elasticity() const { return elasticity_; }

  /// Same context with a different dof mask.
  EnergyContext with_frozen_phi(bool freeze) const;
  /// Same context without loads.
  EnergyContext without_loads() const;

 private:
  GridSpec grid_;
  std::shared_ptr<const StoredEnergy> model_;
  std::shared_ptr<const PotentialSolver> solver_;
  std::optional<LoadSpec> loads_;
  DofMap dofs_;
  ElasticityTensor elasticity_;
};

/// Objective selector: the rescaled nonlinear energy at eps > 0, or the limit
/// energy when eps is empty.
struct Objective {
  std::optional<double> eps;

  static Objective nonlinear(double e) { return {e}; }
  static Objective limit() { return {std::nullopt}; }
  bool is_limit() const { return !eps.has_value(); }
};

/// Non-throwing evaluation; inadmissible states get total = +inf.
/// Includes L and M when the context carries loads.
EnergyReport evaluate(const EnergyContext& ctx, const StateFields& state, const Objective& obj,
                      bool with_gradient = true);

/// G_eps (plus loads when present). Throws Inadmissible for det F <= 0.
EnergyReport energy_G_eps(const EnergyContext& ctx, const StateFields& state, double eps,
                          bool with_gradient = true);

/// G_0 (plus loads when present).
EnergyReport energy_G0(const EnergyContext& ctx, const StateFields& state,
                       bool with_gradient = true);

struct LoadValues {
  double load_work = 0.0;  ///< L(u) = int f . u
  double zeeman = 0.0;     ///< M = int_Omega h(x + eps u) . M(x) dx
  Eigen::VectorXd gradient_load_work;  ///< full layout
  Eigen::VectorXd gradient_zeeman;     ///< full layout
};

/// Loads by three-point quadrature on each reference element.
LoadValues loads_eval(const GridSpec& grid, const StateFields& state, double eps,
                      const LoadSpec& loads);

struct AdmissibilityReport {
  double min_det = 0.0;
  double max_opnorm_eps_grad_u = 0.0;
  bool all_positive = false;
  bool ciarlet_pointwise = false;    ///< eps |grad u|_O < 1 on every element
  bool ciarlet_global_hint = false;  ///< sup eps |grad u|_O < c
  int implication_violations = 0;    ///< elements with eps |grad u|_O < 1 but det <= 0
};

AdmissibilityReport admissibility(const GridSpec& grid, const StateFields& state, double eps,
                                  double ciarlet_constant = 1.0);

}  // namespace magel
