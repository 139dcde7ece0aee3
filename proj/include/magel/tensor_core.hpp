#pragma once

// Small dense 2x2 kernels. The body dimension is fixed at d = 2 throughout
// the library; every routine here is closed form or a short fixed iteration.

#include <Eigen/Core>
#include <Eigen/LU>

#include <utility>

namespace magel {

inline constexpr int kDim = 2;

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// A proper rotation. Construction checks R^T R = I and det R = 1 to 1e-12.
class Rotation2 {
 public:
  Rotation2() : m_(Mat2::Identity()) {}
  explicit Rotation2(const Mat2& m);
  static Rotation2 from_angle(double theta);

  const Mat2& matrix() const { return m_; }
  double angle() const;
  operator const Mat2&() const { return m_; }

 private:
  struct Unchecked {};
  Rotation2(const Mat2& m, Unchecked) : m_(m) {}
  Mat2 m_;
};

double determinant(const Mat2& f);

/// Throws SingularMatrix when |det F| <= 1e-14.
Mat2 invert(const Mat2& f);

/// Largest singular value.
double operator_norm(const Mat2& f);

/// (sigma1, sigma2) with sigma1 >= sigma2 >= 0.
std::pair<double, double> singular_values(const Mat2& f);

/// Squared Frobenius distance to SO(2): |F|^2 - 4q + 2 with
/// q = |(F11 + F22, F21 - F12)| / 2. Valid for every F.
double dist_SO_squared(const Mat2& f);
double dist_SO(const Mat2& f);

/// Rotation maximizing tr(R^T F), defined whenever F11 + F22 or F21 - F12 is
/// nonzero. No orientation check.
Mat2 nearest_rotation(const Mat2& f);

/// Polar rotation of F. Throws NotOrientationPreserving for det F <= 0.
Rotation2 project_SO(const Mat2& f);

/// exp(A) by scaling and squaring of a truncated Taylor series.
Mat2 mat_exp(const Mat2& a);

/// exp(A) from A = (tr A / 2) I + A0 with A0^2 = -det(A0) I.
Mat2 mat_exp_closed_form(const Mat2& a);

Mat2 sym(const Mat2& h);
Mat2 skew(const Mat2& h);

/// Frobenius inner product A:B.
inline double ddot(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace magel
