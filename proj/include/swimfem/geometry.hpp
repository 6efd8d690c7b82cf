#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace swimfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;

/// z-component of the 3D cross product of two planar vectors.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Counter-clockwise quarter turn: (a, b) -> (-b, a).
inline Vec2 perp(const Vec2& a) { return {-a.y(), a.x()}; }

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * orient(a, b, c); }

/// Maps an angle into [-pi, pi].
inline double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * kPi);
  if (w < -kPi) w += 2.0 * kPi;
  if (w > kPi) w -= 2.0 * kPi;
  return w;
}

inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = ab.squaredNorm();
  const double ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// True when the open segments [a, b] and [c, d] cross at a single interior point.
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// True when the closed segments [a, b] and [c, d] share at least one point.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

double polygon_signed_area(std::span<const Vec2> polygon);
double polygon_perimeter(std::span<const Vec2> polygon);
bool point_in_polygon(const Vec2& p, std::span<const Vec2> polygon);

/// Checks every pair of non-adjacent edges of a closed polygon for intersection.
bool polygon_is_simple(std::span<const Vec2> polygon);

double polygon_distance(const Vec2& p, std::span<const Vec2> polygon);

}  // namespace swimfem
