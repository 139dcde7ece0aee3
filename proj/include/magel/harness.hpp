#pragma once

// Experiment drivers: the eps-sweep comparing minima of the nonlinear and the
// limit energy, the recovery-sequence check, the geometric-rigidity probe and
// the batch of pointwise hypothesis checks.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "magel/config.hpp"

namespace magel {

struct SweepRecord {
  double eps = 0.0;
  double s_eps = 0.0;
  double s0 = 0.0;
  double gap = 0.0;
  double elastic = 0.0;
  double exchange = 0.0;
  double magnetostatic = 0.0;
  double load_work = 0.0;
  double zeeman = 0.0;
  double u_h1_dist = 0.0;
  double m_l2_dist = 0.0;
  double min_det = 0.0;
  int iterations = 0;
  bool converged = false;
  // Not part of the CSV.
  double g_eps = 0.0;  ///< unloaded G_eps at the minimizer
  int overlap_cells = 0;
  AdmissibilityReport admissibility;
  StateFields state;
};

struct SweepResult {
  StateFields limit_state;  ///< minimizer of F_0
  SolverStats limit_stats;
  EnergyReport limit_report;
  std::vector<SweepRecord> records;  ///< decreasing eps
};

/// Minimizes F_0 once, then F_eps for each eps. With warm_start each point
/// starts from the previous minimizer through recovery_initializer.
/// `parallel` runs cold-started points concurrently.
SweepResult run_sweep(const Config& config, bool parallel = false);

/// Column order is fixed; new columns are appended.
const std::vector<std::string>& sweep_csv_columns();
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

/// Discrete H^1 distance of two displacement fields.
double h1_distance(const GridSpec& grid, const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b);

/// L^2 distance of chi_{y_a(Omega)} m_a and chi_{y_b(Omega)} m_b on the box cells.
double pushed_magnetization_distance(const GridSpec& grid, const StateFields& a, double eps_a,
                                     const StateFields& b, double eps_b, const BoxGrid& box);

/// Recovery state at eps: the same nodal u and phi. The Eulerian field
/// m_eps = (m_0 o y_eps^-1) / det grad y_eps then follows from the kinematics.
/// Throws Inadmissible if some det(I + eps grad u) <= 0.
StateFields recovery_initializer(const GridSpec& grid, const StateFields& u0_state, double eps);

struct RecoveryPoint {
  double eps = 0.0;
  double g_eps = 0.0;
  double g0 = 0.0;
  double gap = 0.0;
};

/// |G_eps(recovery) - G_0(u0, M0)| for each eps.
std::vector<RecoveryPoint> recovery_experiment(const EnergyContext& ctx, const StateFields& u0_state,
                                               const std::vector<double>& eps_values);

/// Least-squares slope of log(gap) against log(eps).
double loglog_slope(const std::vector<RecoveryPoint>& points);

struct RigiditySample {
  double lhs = 0.0;  ///< int |grad v - R|^p
  double rhs = 0.0;  ///< int g_p(dist(grad v, SO(2)))
  double ratio = 0.0;
  bool skipped = false;  ///< 0 / 0
  Mat2 mean_gradient = Mat2::Zero();
  Mat2 rotation = Mat2::Identity();
  double projection_residual = 0.0;  ///< | |R - mean| - dist(mean, SO(2)) |
};

/// R is the rotation nearest to the mean gradient of the P1 map v.
RigiditySample rigidity_ratio(const GridSpec& grid, const Eigen::Matrix2Xd& v, double p);

struct RigidityStats {
  std::vector<RigiditySample> samples;
  int skipped = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  double max_projection_residual = 0.0;
  bool all_finite = true;
};

/// Random low-frequency trigonometric maps composed with random rotations.
RigidityStats rigidity_probe(int n, double p, int samples, std::uint64_t seed,
                             double amplitude = 0.05);
void write_rigidity_csv(std::ostream& out, const RigidityStats& stats);

struct CheckResult {
  std::string name;
  std::string status;  ///< "pass", "fail" or "known-paper-discrepancy"
  nlohmann::json detail;
};

struct HypothesisReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

/// Frozen regression values of the grid searches in hypothesis_check.
inline constexpr double kTaylorCubicConstant = 7.6;        // |Phi(I+H) - C H:H / 2| <= k |H|^3
inline constexpr double kSubadditivityConstant = 4.06;     // g(s+t) <= C (g(s) + t^2), t <= 1

HypothesisReport hypothesis_check(const StoredEnergyModel& model, int samples, std::uint64_t seed);

}  // namespace magel
