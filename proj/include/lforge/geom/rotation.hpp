#pragma once

#include <cmath>
#include <numbers>

#include "lforge/core/error.hpp"
#include "lforge/geom/vec3.hpp"

namespace lforge {

// Cross-product matrix: skew(k) * v == cross(k, v).
constexpr Mat3 skew(const Vec3& k) { return Mat3{{0, -k.z, k.y, k.z, 0, -k.x, -k.y, k.x, 0}}; }

// R = I + sin(theta) K + (1 - cos(theta)) K^2 for a unit axis k.
inline Mat3 axis_angle(const Vec3& k, double theta) {
  const Mat3 K = skew(k);
  return Mat3::identity() + K * std::sin(theta) + (K * K) * (1.0 - std::cos(theta));
}

// Unit basis vector along the smallest absolute component of v (lowest index on ties).
inline Vec3 smallest_axis(const Vec3& v) {
  const double ax = std::abs(v.x), ay = std::abs(v.y), az = std::abs(v.z);
  if (ax <= ay && ax <= az) return {1, 0, 0};
  if (ay <= az) return {0, 1, 0};
  return {0, 0, 1};
}

// Rotation taking the direction of `from` onto the direction of `to`.
inline Mat3 rodrigues_rotation(const Vec3& from, const Vec3& to) {
  const double nf = norm(from), nt = norm(to);
  if (!(nf > 0.0) || !(nt > 0.0) || !std::isfinite(nf) || !std::isfinite(nt))
    throw ValidationError("rotation needs two nonzero finite vectors");
  const Vec3 a = from / nf, b = to / nt;
  const Vec3 axis = cross(a, b);
  const double s = norm(axis), c = dot(a, b);
  if (s <= 1e-12) {
    if (c > 0.0) return Mat3::identity();
    const Vec3 p = cross(a, smallest_axis(a));
    return axis_angle(p / norm(p), std::numbers::pi);
  }
  return axis_angle(axis / s, std::atan2(s, c));
}

}  // namespace lforge
