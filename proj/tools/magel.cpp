// Command-line driver for the epsilon sweep, single minimizations, the
// recovery experiment, the rigidity probe and the hypothesis checks.
//
// Exit codes: 0 success, 1 failed check, 2 solver non-convergence,
// 3 configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "magel/config.hpp"
#include "magel/errors.hpp"
#include "magel/harness.hpp"

namespace {

using nlohmann::json;
using namespace magel;

constexpr int kExitCheckFailed = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitConfig = 3;

struct Globals {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool parallel = false;
};

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json state_json(const GridSpec& grid, const StateFields& s, std::optional<double> eps,
                const EnergyReport& report, const SolverStats& stats) {
  std::vector<double> u;
  u.reserve(2 * grid.num_nodes());
  for (int k = 0; k < grid.num_nodes(); ++k) {
    u.push_back(s.u(0, k));
    u.push_back(s.u(1, k));
  }
  std::vector<double> phi(s.phi.data(), s.phi.data() + s.phi.size());
  json j;
  j["grid"] = {{"n", grid.n}, {"gamma", to_string(grid.gamma)}, {"node_order", "k = j*n + i"}};
  j["eps"] = eps ? json(*eps) : json(nullptr);
  j["u"] = u;
  j["phi"] = phi;
  j["energy"] = {{"elastic", report.elastic},   {"exchange", report.exchange},
                 {"magnetostatic", report.magnetostatic}, {"load_work", report.load_work},
                 {"zeeman", report.zeeman},     {"total", report.total}};
  j["solver"] = {{"iterations", stats.iterations}, {"evaluations", stats.evaluations},
                 {"grad_norm", stats.grad_norm},   {"status", stats.status()}};
  return j;
}

int run_minimize(const Config& config, const Globals& g, std::optional<double> eps) {
  const EnergyContext ctx = config.make_context(true);
  const StateFields init = default_initial_state(ctx.grid(), config.boundary);
  const Objective obj = eps ? Objective::nonlinear(*eps) : Objective::limit();
  const MinimizeResult res = minimize(ctx, obj, init, config.solver);
  Output out(g.out_path);
  out.stream() << std::setprecision(17) << state_json(ctx.grid(), res.state, eps, res.report, res.stats).dump(1)
               << "\n";
  if (!g.quiet) {
    std::cerr << "total " << std::setprecision(12) << res.report.total << " after "
              << res.stats.iterations << " iterations (" << res.stats.status() << ")\n";
  }
  return res.stats.converged ? 0 : kExitNoConvergence;
}

int run_sweep_cmd(const Config& config, const Globals& g) {
  const SweepResult result = run_sweep(config, g.parallel);
  Output out(g.out_path);
  write_sweep_csv(out.stream(), result.records);
  bool ok = result.limit_stats.converged;
  for (const auto& r : result.records) ok = ok && r.converged;
  if (!g.quiet) {
    std::cerr << "s0 = " << std::setprecision(12) << result.limit_report.total << " ("
              << result.limit_stats.status() << ")\n";
    for (const auto& r : result.records) {
      std::cerr << "eps " << r.eps << "  s_eps " << r.s_eps << "  gap " << r.gap
                << "  overlap_cells " << r.overlap_cells << "  "
                << (r.converged ? "converged" : "NOT converged") << "\n";
    }
  }
  return ok ? 0 : kExitNoConvergence;
}

int run_recovery(const Config& config, const Globals& g, const std::vector<double>& eps) {
  // u0 is the boundary datum extended to all of Omega; M0 = e1.
  const EnergyContext ctx = config.make_context(false);
  StateFields u0 = StateFields::zeros(ctx.grid());
  for (int k = 0; k < ctx.grid().num_nodes(); ++k) {
    u0.u.col(k) = config.boundary.value(ctx.grid().nodes[k]);
  }
  const std::vector<RecoveryPoint> points = recovery_experiment(ctx, u0, eps);
  json j;
  j["points"] = json::array();
  for (const auto& p : points) {
    j["points"].push_back({{"eps", p.eps}, {"G_eps", p.g_eps}, {"G_0", p.g0}, {"gap", p.gap}});
  }
  if (points.size() >= 2) j["loglog_slope"] = loglog_slope(points);
  Output out(g.out_path);
  out.stream() << std::setprecision(17) << j.dump(1) << "\n";
  return 0;
}

int run_rigidity(const Config& config, const Globals& g) {
  const RigidityStats stats = rigidity_probe(config.grid_n, config.p, config.rigidity.samples,
                                             config.seed, config.rigidity.amplitude);
  Output out(g.out_path);
  write_rigidity_csv(out.stream(), stats);
  if (!g.quiet) {
    std::cerr << "max ratio " << stats.max_ratio << ", skipped " << stats.skipped
              << ", max projection residual " << stats.max_projection_residual << "\n";
  }
  return stats.all_finite ? 0 : kExitCheckFailed;
}

int run_check(const Config& config, const Globals& g) {
  const StoredEnergyModel model(config.p, config.a);
  const HypothesisReport report = hypothesis_check(model, config.check_samples, config.seed);
  Output out(g.out_path);
  out.stream() << std::setprecision(17) << report.to_json().dump(1) << "\n";
  if (!g.quiet) {
    for (const auto& c : report.checks) std::cerr << c.status << "  " << c.name << "\n";
  }
  return report.all_passed() ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetoelastic energy minimization and linearization experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out_path, "Output file (default: stdout)");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_flag("--quiet", g.quiet, "Suppress progress output on stderr");
  app.add_flag("--parallel", g.parallel, "Run cold-started sweep points concurrently");

  auto* sweep = app.add_subcommand("sweep", "Minimize F_0 and F_eps over the eps sequence; CSV output");
  double eps_single = 0.0;
  auto* minimize_cmd = app.add_subcommand("minimize", "Minimize F_eps at one eps; JSON state dump");
  minimize_cmd->add_option("--eps", eps_single, "eps > 0")->required()->check(CLI::PositiveNumber);
  auto* linear = app.add_subcommand("linear", "Minimize the limit functional F_0; JSON state dump");
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
  auto* recovery = app.add_subcommand("recovery", "Recovery-sequence energy gaps; JSON output");
  recovery->add_option("--eps", eps_list, "eps values (repeatable)")->check(CLI::PositiveNumber);
  auto* rigidity = app.add_subcommand("rigidity", "Geometric-rigidity ratio statistics; CSV output");
  auto* check = app.add_subcommand("check", "Pointwise hypothesis checks on the stored energy; JSON output");

  CLI11_PARSE(app, argc, argv);

  Config config;
  try {
    if (!g.config_path.empty()) config = load_config(g.config_path);
    if (g.seed) config.seed = *g.seed;
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.path() << ": " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (sweep->parsed()) return run_sweep_cmd(config, g);
    if (minimize_cmd->parsed()) return run_minimize(config, g, eps_single);
    if (linear->parsed()) return run_minimize(config, g, std::nullopt);
    if (recovery->parsed()) return run_recovery(config, g, eps_list);
    if (rigidity->parsed()) return run_rigidity(config, g);
    if (check->parsed()) return run_check(config, g);
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
