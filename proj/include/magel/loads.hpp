#pragma once

#include <string>

#include "magel/tensor_core.hpp"

namespace magel {

/// Analytic vector field used for body forces f and applied fields h.
///   constant:      value
///   gaussian-bump: value * exp(-|x - center|^2 / (2 width^2))
///   shear:         (amplitude * x2, 0)
struct LoadField {
  enum class Kind { kConstant, kGaussianBump, kShear };
  Kind kind = Kind::kConstant;
  Vec2 value = Vec2::Zero();
  Vec2 center{0.5, 0.5};
  double width = 0.25;
  double amplitude = 0.0;

  Vec2 operator()(const Vec2& x) const;
  /// Row c is the gradient of component c.
  Mat2 jacobian(const Vec2& x) const;
  /// Upper bound of |field| over the square [lo, hi]^2.
  double sup_norm(double lo, double hi) const;
  bool is_zero() const;

  static LoadField constant(const Vec2& v) { return {Kind::kConstant, v}; }
  static Kind parse_kind(const std::string& name);
  static std::string kind_name(Kind kind);
};

/// Body force f on Omega and applied magnetic field h on R^2.
struct LoadSpec {
  LoadField f;
  LoadField h;
};

}  // namespace magel
