#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace apexrl {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

// z-component of the 2D cross product.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Right-hand normal of a direction vector (points to the right of travel).
inline Vec2 right_normal(const Vec2& t) { return Vec2(t.y(), -t.x()); }

}  // namespace apexrl
