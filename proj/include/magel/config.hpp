#pragma once

// Run configuration. The JSON layout is
//   grid{n, gamma}, model{p, a},
//   magnetostatics{mu0, pad, N, cg_tol, cg_max, preconditioner},
//   loads{f, h} with each field {kind, value, center, width, amplitude},
//   boundary{w, alpha}, solver{tol, max_iter, memory},
//   sweep{eps_start, eps_factor, num_eps, warm_start},
//   rigidity{samples, amplitude}, check{samples}, ciarlet_c, seed.
// Every key is optional; unknown keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "magel/energy.hpp"
#include "magel/minimize.hpp"

namespace magel {

struct SweepSettings {
  double eps_start = 0.4;
  double eps_factor = 0.5;
  int num_eps = 6;
  bool warm_start = true;

  std::vector<double> eps_values() const;
};

struct RigiditySettings {
  int samples = 200;
  double amplitude = 0.05;
};

struct Config {
  int grid_n = 17;
  BoundarySelector gamma = BoundarySelector::kLeftEdge;
  double p = 4.0;
  double a = 2.0;
  BoxGrid box{1.0, 128};
  MagnetostaticsOptions magnetostatics{};
  LoadSpec loads{LoadField::constant(Vec2::Zero()), LoadField::constant(Vec2(0.1, 0.0))};
  BoundaryDatum boundary{BoundaryDatum::Kind::kUniaxialStretch, 0.1};
  SolverOptions solver{};
  SweepSettings sweep{};
  RigiditySettings rigidity{};
  int check_samples = 10000;
  double ciarlet_c = 1.0;
  std::uint64_t seed = 42;

  GridSpec make_grid() const;
  std::shared_ptr<const StoredEnergyModel> make_model() const;
  EnergyContext make_context(bool with_loads = true) const;
};

/// Throws ConfigError naming the JSON path of the first bad field.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);
nlohmann::json to_json(const Config& c);

}  // namespace magel
