#pragma once

#include <memory>
#include <algorithm>
#include <cmath>
#include <random>

#include "magel/energy.hpp"

namespace testutil {

inline magel::StateFields random_state(const magel::GridSpec& grid, std::mt19937_64& rng,
                                       double amp) {
  std::uniform_real_distribution<double> u(-1, 1);
  magel::StateFields s = magel::StateFields::zeros(grid);
  for (int k = 0; k < grid.num_nodes(); ++k) {
    s.u.col(k) = amp * magel::Vec2(u(rng), u(rng));
    s.phi(k) = M_PI * u(rng);
  }
  return s;
}

inline magel::EnergyContext context(int n, int cells, double mu0,
                                    std::optional<magel::LoadSpec> loads = {},
                                    bool freeze_phi = false) {
  magel::MagnetostaticsOptions opt;
  opt.mu0 = mu0;
  return magel::EnergyContext(magel::build_grid(n, magel::BoundarySelector::kLeftEdge),
                              std::make_shared<magel::StoredEnergyModel>(4.0, 2.0),
                              magel::BoxGrid{1.0, cells}, opt, loads, freeze_phi);
}

inline magel::LoadSpec bumpy_loads() {
  magel::LoadField f{magel::LoadField::Kind::kShear};
  f.amplitude = 0.7;
  magel::LoadField h{magel::LoadField::Kind::kGaussianBump, magel::Vec2(0.4, -0.3),
                     magel::Vec2(0.6, 0.4), 0.3};
  return {f, h};
}

using namespace magel;

// smooth random displacement plus a little nodal noise, random angles
inline StateFields smooth_state(const GridSpec& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  const Mat2 a{{u(rng), u(rng)}, {u(rng), u(rng)}};
  const double k1 = 1 + 2 * (u(rng) + 1), k2 = 1 + 2 * (u(rng) + 1);
  const Vec2 b(u(rng), u(rng));
  StateFields s = StateFields::zeros(grid);
  for (int i = 0; i < grid.num_nodes(); ++i) {
    const Vec2 x = grid.nodes[i];
    s.u.col(i) = 0.5 * a * x + 0.1 * b * std::sin(k1 * x.x() + k2 * x.y()) +
                 0.01 * Vec2(u(rng), u(rng));
    s.phi(i) = M_PI * u(rng);
  }
  return s;
}

struct FdResult {
  double worst = 0.0;
  int checked = 0;
};

// central differences on a random subset of free dofs
template <typename Energy>
inline FdResult fd_check(const EnergyContext& ctx, const StateFields& s, const Eigen::VectorXd& grad,
                  Energy energy, std::mt19937_64& rng, int count) {
  const DofMap& dofs = ctx.dofs();
  const Eigen::VectorXd x = dofs.gather(s);
  std::uniform_int_distribution<int> pick(0, dofs.num_free() - 1);
  const double t = 1e-6;
  const double scale = grad.cwiseAbs().maxCoeff();
  FdResult r;
  for (int c = 0; c < count; ++c) {
    const int i = pick(rng);
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += t;
    xm(i) -= t;
    StateFields sp = s, sm = s;
    dofs.scatter(xp, sp);
    dofs.scatter(xm, sm);
    const double fd = (energy(sp) - energy(sm)) / (2 * t);
    const double denom = std::max({std::abs(fd), std::abs(grad(i)), 1e-3 * scale});
    r.worst = std::max(r.worst, std::abs(fd - grad(i)) / denom);
    ++r.checked;
  }
  return r;
}


}  // namespace testutil
