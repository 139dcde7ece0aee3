#include "magel/energy_model.hpp"

#include <cmath>

#include "magel/errors.hpp"

namespace magel {

namespace {

Eigen::Vector4d vec(const Mat2& h) { return {h(0, 0), h(0, 1), h(1, 0), h(1, 1)}; }

Mat2 unvec(int k) {
  Mat2 h = Mat2::Zero();
  h(k / 2, k % 2) = 1.0;
  return h;
}

void require_unit(const MagnetizationVector& m, const char* where) {
  if (std::abs(m.norm() - 1.0) > 1e-10) {
    throw UnitLengthViolation(std::string(where) + ": |M| != 1");
  }
}

}  // namespace

double g_p(double t, double p) {
  if (t < 0.0) throw DomainError("g_p: negative argument");
  if (t <= 1.0) return 0.5 * t * t;
  return std::pow(t, p) / p + 0.5 - 1.0 / p;
}

double g_p_derivative(double t, double p) {
  if (t < 0.0) throw DomainError("g_p: negative argument");
  return t <= 1.0 ? t : std::pow(t, p - 1.0);
}

Mat2 E_of(const MagnetizationVector& m) {
  require_unit(m, "E_of");
  return -m * m.transpose() + 0.5 * Mat2::Identity();
}

Mat2 e_of(const Mat2& f, const MagnetizationVector& m) {
  const double det = determinant(f);
  return -det * det * m * m.transpose() + 0.5 * Mat2::Identity();
}

double theta_vol(double delta, double a) {
  if (!(delta > 0.0)) return kInfinity;
  // expm1(x) - x with x = -a log(delta), stable near delta = 1
  const double x = -a * std::log1p(delta - 1.0);
  if (std::abs(x) < 1e-3) return x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
  return std::expm1(x) - x;
}

double theta_vol_derivative(double delta, double a) {
  if (!(delta > 0.0)) return -kInfinity;
  return a * (1.0 / delta - std::pow(delta, -a - 1.0));
}

double ElasticityTensor::contract(const Mat2& h) const {
  const Eigen::Vector4d v = vec(h);
  return v.dot(entries * v);
}

StoredEnergyModel::StoredEnergyModel(double p, double a) : p_(p), a_(a) {
  if (!(p > 2.0)) throw InvalidModel("model.p must exceed 2");
  if (!(a > 1.0)) throw InvalidModel("model.a must exceed 1");
}

double StoredEnergyModel::phi(const Mat2& f) const {
  const double det = determinant(f);
  if (!(det > 0.0)) return kInfinity;
  return g_p(dist_SO(f), p_) + theta_vol(det, a_);
}

PhiEvaluation StoredEnergyModel::phi_with_gradient(const Mat2& f) const {
  PhiEvaluation out;
  const double det = determinant(f);
  if (!(det > 0.0)) {
    out.value = kInfinity;
    return out;
  }
  const double t = dist_SO(f);
  out.value = g_p(t, p_) + theta_vol(det, a_);
  // d g_p(dist)/dF = (g'(t)/t) (F - R*); g'(t)/t is 1 on the quadratic branch.
  const double weight = t <= 1.0 ? 1.0 : std::pow(t, p_ - 2.0);
  const Mat2 cofactor{{f(1, 1), -f(1, 0)}, {-f(0, 1), f(0, 0)}};  // det F * F^-T
  out.gradient = weight * (f - nearest_rotation(f)) + theta_vol_derivative(det, a_) * cofactor;
  return out;
}

ElasticityTensor StoredEnergyModel::elasticity() const {
  ElasticityTensor c;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Mat2 hi = unvec(i);
      const Mat2 hj = unvec(j);
      c.entries(i, j) = ddot(sym(hi), sym(hj)) + a_ * a_ * hi.trace() * hj.trace();
    }
  }
  return c;
}

double W(const Mat2& f, const MagnetizationVector& m, const StoredEnergy& model) {
  return model.phi(mat_exp(e_of(f, m)) * f);
}

double quadratic_density(const Mat2& h, const MagnetizationVector& m, const StoredEnergy& model) {
  require_unit(m, "quadratic_density");
  const Mat2 s = sym(h) + e_of(Mat2::Identity(), m);
  return 0.5 * model.elasticity().contract(s);
}

ElasticityTensor elasticity_fd_oracle(const StoredEnergy& model, double step) {
  const Mat2 id = Mat2::Identity();
  const double t = step;
  ElasticityTensor c;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      const Mat2 hi = unvec(i);
      const Mat2 hj = unvec(j);
      const double d2 = (model.phi(id + t * hi + t * hj) - model.phi(id + t * hi - t * hj) -
                         model.phi(id - t * hi + t * hj) + model.phi(id - t * hi - t * hj)) /
                        (4.0 * t * t);
      c.entries(i, j) = d2;
      c.entries(j, i) = d2;
    }
  }
  return c;
}

MagneticStretch magnetic_stretch(const MagnetizationVector& m, double eps) {
  // E(M) = -1/2 [[cos 2a, sin 2a], [sin 2a, -cos 2a]] has eigenvalues +-1/2.
  const double c2 = m(0) * m(0) - m(1) * m(1);
  const double s2 = 2.0 * m(0) * m(1);
  const Mat2 e{{-0.5 * c2, -0.5 * s2}, {-0.5 * s2, 0.5 * c2}};
  const Mat2 de{{s2, -c2}, {-c2, -s2}};
  const double sh = 2.0 * std::sinh(0.5 * eps);
  return {std::cosh(0.5 * eps) * Mat2::Identity() + sh * e, sh * de};
}

}  // namespace magel
