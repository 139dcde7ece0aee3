#include "magel/tensor_core.hpp"

#include <algorithm>
#include <cmath>

#include "magel/errors.hpp"

namespace magel {

namespace {

// Half-norms of the conformal and anticonformal parts of F.
// sigma1 = q + r, sigma2 = |q - r|, det F = q^2 - r^2.
std::pair<double, double> conformal_split(const Mat2& f) {
  const double q = 0.5 * std::hypot(f(0, 0) + f(1, 1), f(1, 0) - f(0, 1));
  const double r = 0.5 * std::hypot(f(0, 0) - f(1, 1), f(1, 0) + f(0, 1));
  return {q, r};
}

}  // namespace

Rotation2::Rotation2(const Mat2& m) : m_(m) {
  const double orth = (m.transpose() * m - Mat2::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-12 || std::abs(m.determinant() - 1.0) > 1e-12) {
    throw DomainError("Rotation2: matrix is not a proper rotation");
  }
}

Rotation2 Rotation2::from_angle(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 m;
  m << c, -s, s, c;
  return Rotation2(m, Unchecked{});
}

double Rotation2::angle() const { return std::atan2(m_(1, 0), m_(0, 0)); }

double determinant(const Mat2& f) { return f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0); }

Mat2 invert(const Mat2& f) {
  const double det = determinant(f);
  if (std::abs(det) <= 1e-14) {
    throw SingularMatrix("invert: |det F| <= 1e-14");
  }
  Mat2 inv;
  inv << f(1, 1), -f(0, 1), -f(1, 0), f(0, 0);
  return inv / det;
}

std::pair<double, double> singular_values(const Mat2& f) {
  const auto [q, r] = conformal_split(f);
  return {q + r, std::abs(q - r)};
}

double operator_norm(const Mat2& f) { return singular_values(f).first; }

Mat2 nearest_rotation(const Mat2& f);

double dist_SO_squared(const Mat2& f) {
  // |F - R|^2 entrywise; the |F|^2 - 4q + 2 form cancels badly near SO(2).
  return (f - nearest_rotation(f)).squaredNorm();
}

double dist_SO(const Mat2& f) { return std::sqrt(dist_SO_squared(f)); }

Mat2 nearest_rotation(const Mat2& f) {
  const double c = f(0, 0) + f(1, 1);
  const double s = f(1, 0) - f(0, 1);
  const double n = std::hypot(c, s);
  if (n == 0.0) return Mat2::Identity();
  Mat2 r;
  r << c / n, -s / n, s / n, c / n;
  return r;
}

Rotation2 project_SO(const Mat2& f) {
  if (determinant(f) <= 0.0) {
    throw NotOrientationPreserving("project_SO: det F <= 0");
  }
  return Rotation2::from_angle(std::atan2(f(1, 0) - f(0, 1), f(0, 0) + f(1, 1)));
}

Mat2 mat_exp(const Mat2& a) {
  // Scale so that the 1-norm is at most 1/2, then 20 Taylor terms leave a
  // remainder far below double precision.
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Mat2 b = a / std::ldexp(1.0, squarings);

  Mat2 sum = Mat2::Identity();
  Mat2 term = Mat2::Identity();
  for (int k = 1; k <= 20; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Mat2 mat_exp_closed_form(const Mat2& a) {
  const double half_trace = 0.5 * a.trace();
  const Mat2 a0 = a - half_trace * Mat2::Identity();
  const double det0 = determinant(a0);  // a0^2 = -det0 I
  double c = 1.0;
  double sinc = 1.0;
  if (det0 > 0.0) {
    const double w = std::sqrt(det0);
    c = std::cos(w);
    sinc = std::sin(w) / w;
  } else if (det0 < 0.0) {
    const double w = std::sqrt(-det0);
    c = std::cosh(w);
    sinc = std::sinh(w) / w;
  }
  return std::exp(half_trace) * (c * Mat2::Identity() + sinc * a0);
}

Mat2 sym(const Mat2& h) { return 0.5 * (h + h.transpose()); }

Mat2 skew(const Mat2& h) { return 0.5 * (h - h.transpose()); }

}  // namespace magel
