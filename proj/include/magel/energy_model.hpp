#pragma once

// Pointwise energy densities: the growth function g_p, the stored energy Phi,
// magnetostrictive strains and the coupled density W(F, m) = Phi(exp(e(F, m)) F).

#include <Eigen/Core>

#include <limits>

#include "magel/tensor_core.hpp"

namespace magel {

using MagnetizationVector = Vec2;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Piecewise growth t^2/2 below 1, t^p/p + 1/2 - 1/p above. DomainError for t < 0.
double g_p(double t, double p);
double g_p_derivative(double t, double p);

/// E(M) = -M (x) M + I/2; requires | |M| - 1 | <= 1e-10.
Mat2 E_of(const MagnetizationVector& m);

/// e(F, m) = -(det F)^2 m (x) m + I/2.
Mat2 e_of(const Mat2& f, const MagnetizationVector& m);

/// Volumetric barrier delta^-a - 1 + a ln delta, +inf for delta <= 0.
double theta_vol(double delta, double a);
double theta_vol_derivative(double delta, double a);

/// Second derivative D^2 Phi(I) stored as a 4x4 matrix acting on
/// vec(H) = (H11, H12, H21, H22).
struct ElasticityTensor {
  Eigen::Matrix4d entries = Eigen::Matrix4d::Zero();

  /// C H : H
  double contract(const Mat2& h) const;
};

struct PhiEvaluation {
  double value = 0.0;
  Mat2 gradient = Mat2::Zero();  ///< dPhi/dF; meaningless when value is +inf
};

/// Interface for stored energies Phi. Implementations must be frame
/// indifferent, vanish on SO(2) and grow at least like g_p(dist(F, SO(2))).
class StoredEnergy {
 public:
  virtual ~StoredEnergy() = default;
  virtual double phi(const Mat2& f) const = 0;
  virtual PhiEvaluation phi_with_gradient(const Mat2& f) const = 0;
  virtual ElasticityTensor elasticity() const = 0;
  virtual double growth_exponent() const = 0;
};

/// Default stored energy Phi(F) = g_p(dist(F, SO(2))) + theta(det F; a).
class StoredEnergyModel final : public StoredEnergy {
 public:
  /// Throws InvalidModel unless p > 2 and a > 1.
  explicit StoredEnergyModel(double p = 4.0, double a = 2.0);

  double p() const { return p_; }
  double a() const { return a_; }

  double phi(const Mat2& f) const override;
  PhiEvaluation phi_with_gradient(const Mat2& f) const override;
  /// Closed form C H : H = |H_sym|^2 + a^2 (tr H)^2.
  ElasticityTensor elasticity() const override;
  double growth_exponent() const override { return p_; }

 private:
  double p_;
  double a_;
};

/// W(F, m) = Phi(exp(e(F, m)) F), exponential by scaling and squaring.
double W(const Mat2& f, const MagnetizationVector& m, const StoredEnergy& model);

/// 1/2 C S : S with S = sym(H) + e(m); requires |m| = 1 within 1e-10.
double quadratic_density(const Mat2& h, const MagnetizationVector& m, const StoredEnergy& model);

/// Central second differences of Phi at I (step 1e-4) on the 4-dimensional basis.
ElasticityTensor elasticity_fd_oracle(const StoredEnergy& model, double step = 1e-4);

/// exp(eps E(M)) for a unit vector M = (cos alpha, sin alpha), and its
/// derivative with respect to alpha. Uses E(M)^2 = I/4.
struct MagneticStretch {
  Mat2 value;
  Mat2 d_angle;
};
MagneticStretch magnetic_stretch(const MagnetizationVector& m, double eps);

}  // namespace magel
