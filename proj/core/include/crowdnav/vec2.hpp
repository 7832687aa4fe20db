#pragma once

#include <cmath>

namespace crowdnav {

// Planar vector in meters, or meters/second when used as a velocity.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// z-component of the 3D cross product of (a, 0) and (b, 0).
constexpr double det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

constexpr double norm_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Counter-clockwise perpendicular.
constexpr Vec2 perp_ccw(Vec2 a) { return {-a.y, a.x}; }

inline Vec2 normalized_or(Vec2 a, Vec2 fallback) {
  const double n = norm(a);
  if (n < 1e-12) return fallback;
  return a / n;
}

// Scales v down to max_norm when it is longer; direction is preserved.
inline Vec2 clamp_norm(Vec2 v, double max_norm) {
  const double n = norm(v);
  if (n <= max_norm || n < 1e-300) return v;
  return v * (max_norm / n);
}

inline Vec2 rotated(Vec2 v, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace crowdnav
