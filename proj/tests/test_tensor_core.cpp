#include <doctest.h>

#include <cmath>
#include <random>

#include "magel/errors.hpp"
#include "magel/tensor_core.hpp"

using namespace magel;

namespace {

Mat2 random_matrix(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Mat2{{u(rng), u(rng)}, {u(rng), u(rng)}};
}

// min over 10^4 equally spaced angles of |F - R(theta)|, refined by golden section.
std::pair<double, double> brute_force_rotation(const Mat2& f) {
  auto dist = [&](double t) { return (f - Rotation2::from_angle(t).matrix()).norm(); };
  const int n = 10000;
  int best = 0;
  for (int k = 1; k < n; ++k) {
    if (dist(2 * M_PI * k / n) < dist(2 * M_PI * best / n)) best = k;
  }
  double lo = 2 * M_PI * (best - 1) / n, hi = 2 * M_PI * (best + 1) / n;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (dist(a) < dist(b)) hi = b; else lo = a;
  }
  const double t = 0.5 * (lo + hi);
  return {dist(t), t};
}

}  // namespace

TEST_CASE("determinant examples") {
  CHECK(determinant(Mat2::Identity()) == 1.0);
  CHECK(determinant(Mat2{{2, 0}, {0, 3}}) == 6.0);
  CHECK(determinant(Mat2{{0, 1}, {1, 0}}) == -1.0);
}

TEST_CASE("invert") {
  CHECK(invert(Mat2::Identity()).isApprox(Mat2::Identity()));
  CHECK((invert(Mat2{{2, 0}, {0, 4}}) - Mat2{{0.5, 0}, {0, 0.25}}).norm() == doctest::Approx(0.0));
  CHECK_THROWS_AS(invert(Mat2{{1, 1}, {1, 1}}), SingularMatrix);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 f = random_matrix(rng, 2.0);
    if (std::abs(determinant(f)) < 1e-3) continue;
    CHECK((f * invert(f) - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-12 / std::min(1.0, std::abs(determinant(f))));
  }
}

TEST_CASE("operator norm and singular values") {
  CHECK(operator_norm(Mat2{{3, 0}, {0, -1}}) == doctest::Approx(3.0));
  CHECK(operator_norm(Mat2::Identity()) == doctest::Approx(1.0));
  CHECK(operator_norm(Rotation2::from_angle(0.7).matrix()) == doctest::Approx(1.0));
  auto [a, b] = singular_values(Mat2{{2, 0}, {0, 2}});
  CHECK(a == doctest::Approx(2.0));
  CHECK(b == doctest::Approx(2.0));
  auto [c, d] = singular_values(Mat2{{0, 1}, {0, 0}});
  CHECK(c == doctest::Approx(1.0));
  CHECK(std::abs(d) < 1e-12);

  // Oracle: eigenvalues of F^T F by the quadratic formula.
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 f = random_matrix(rng, 3.0);
    const Mat2 g = f.transpose() * f;
    const double tr = g.trace(), det = g.determinant();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    const auto [s1, s2] = singular_values(f);
    CHECK(s1 >= s2);
    CHECK(s2 >= 0.0);
    CHECK(s1 == doctest::Approx(std::sqrt(tr / 2 + disc)).epsilon(1e-10));
    CHECK(std::abs(s1 * s2 - std::abs(determinant(f))) < 1e-10);
    CHECK(std::abs(s1 - operator_norm(f)) < 1e-10);
  }
}

TEST_CASE("dist_SO") {
  CHECK(dist_SO(Rotation2::from_angle(1.3).matrix()) < 1e-14);
  CHECK(dist_SO(2.0 * Mat2::Identity()) == doctest::Approx(std::sqrt(2.0)));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Mat2 f = random_matrix(rng, 2.0);
    CHECK(std::abs(dist_SO(f) - brute_force_rotation(f).first) < 1e-6);
  }
}

TEST_CASE("dist_SO is frame indifferent") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 f = random_matrix(rng, 2.0);
    const Mat2 q = Rotation2::from_angle(ang(rng)).matrix();
    CHECK(std::abs(dist_SO(q * f) - dist_SO(f)) < 1e-12);
  }
}

TEST_CASE("project_SO") {
  CHECK(project_SO(Mat2{{2, 0}, {0, 3}}).matrix().isApprox(Mat2::Identity(), 1e-14));
  CHECK_THROWS_AS(project_SO(Mat2{{1, 0}, {0, -1}}), NotOrientationPreserving);
  CHECK_THROWS_AS(project_SO(Mat2::Zero()), NotOrientationPreserving);

  const Mat2 a{{0, -0.05}, {0.05, 0}};
  const Rotation2 r = project_SO(Mat2::Identity() + a);
  CHECK(r.angle() == doctest::Approx(brute_force_rotation(Mat2::Identity() + a).second).epsilon(1e-8));
  CHECK(r.angle() == doctest::Approx(0.05).epsilon(1e-2));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 f = random_matrix(rng, 2.0);
    if (determinant(f) <= 1e-6) continue;
    const Mat2 q = project_SO(f).matrix();
    CHECK(std::abs((f - q).norm() - dist_SO(f)) < 1e-10);
    CHECK((q.transpose() * q - Mat2::Identity()).norm() < 1e-12);
    CHECK(std::abs(determinant(q) - 1.0) < 1e-12);
    // idempotent on rotations
    CHECK((project_SO(q).matrix() - q).norm() < 1e-12);
  }
}

TEST_CASE("Rotation2 rejects non-rotations") {
  CHECK_THROWS_AS(Rotation2(Mat2{{2, 0}, {0, 0.5}}), DomainError);
  CHECK_NOTHROW(Rotation2(Rotation2::from_angle(0.3).matrix()));
}

TEST_CASE("mat_exp examples") {
  CHECK((mat_exp(Mat2::Zero()) - Mat2::Identity()).norm() == 0.0);
  const Mat2 n{{0, 1}, {0, 0}};
  CHECK((mat_exp(n) - (Mat2::Identity() + n)).norm() < 1e-15);
  const Mat2 e{{-0.5, 0}, {0, 0.5}};
  const Mat2 expected{{std::exp(-0.5), 0}, {0, std::exp(0.5)}};
  CHECK((mat_exp(e) - expected).norm() < 1e-15);
}

TEST_CASE("mat_exp matches closed form on traceless matrices") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 2000; ++i) {
    Mat2 a = random_matrix(rng, 3.0);
    a -= 0.5 * a.trace() * Mat2::Identity();
    const Mat2 closed = mat_exp_closed_form(a);
    CHECK((mat_exp(a) - closed).norm() <= 1e-12 * closed.norm());
  }
}

TEST_CASE("mat_exp properties") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    Mat2 a = random_matrix(rng, 1.0);
    a *= std::uniform_real_distribution<double>(0.0, 5.0)(rng) / a.norm();
    const Mat2 ea = mat_exp(a);
    CHECK(determinant(ea) == doctest::Approx(std::exp(a.trace())).epsilon(1e-10));
    CHECK((ea * mat_exp(-a) - Mat2::Identity()).norm() < 1e-10);
  }
}
