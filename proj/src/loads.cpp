#include "magel/loads.hpp"

#include <algorithm>
#include <cmath>

#include "magel/errors.hpp"

namespace magel {

Vec2 LoadField::operator()(const Vec2& x) const {
  switch (kind) {
    case Kind::kConstant: return value;
    case Kind::kGaussianBump:
      return value * std::exp(-(x - center).squaredNorm() / (2.0 * width * width));
    case Kind::kShear: return {amplitude * x(1), 0.0};
  }
  return Vec2::Zero();
}

Mat2 LoadField::jacobian(const Vec2& x) const {
  switch (kind) {
    case Kind::kConstant: return Mat2::Zero();
    case Kind::kGaussianBump: {
      const double g = std::exp(-(x - center).squaredNorm() / (2.0 * width * width));
      return -g / (width * width) * value * (x - center).transpose();
    }
    case Kind::kShear: return Mat2{{0.0, amplitude}, {0.0, 0.0}};
  }
  return Mat2::Zero();
}

double LoadField::sup_norm(double lo, double hi) const {
  switch (kind) {
    case Kind::kConstant:
    case Kind::kGaussianBump: return value.norm();
    case Kind::kShear: return std::abs(amplitude) * std::max(std::abs(lo), std::abs(hi));
  }
  return 0.0;
}

bool LoadField::is_zero() const {
  switch (kind) {
    case Kind::kConstant:
    case Kind::kGaussianBump: return value.isZero(0.0);
    case Kind::kShear: return amplitude == 0.0;
  }
  return true;
}

LoadField::Kind LoadField::parse_kind(const std::string& name) {
  if (name == "constant") return Kind::kConstant;
  if (name == "gaussian-bump") return Kind::kGaussianBump;
  if (name == "shear") return Kind::kShear;
  throw DomainError("unknown load kind '" + name + "'");
}

std::string LoadField::kind_name(Kind kind) {
  switch (kind) {
    case Kind::kConstant: return "constant";
    case Kind::kGaussianBump: return "gaussian-bump";
    case Kind::kShear: return "shear";
  }
  return "?";
}

}  // namespace magel
