#pragma once

#include <cmath>
#include <ostream>

namespace springmag {

/// Plain Cartesian 3-vector. x and y lie in the film plane, x is the hard easy
/// axis, z is the film normal.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 &operator+=(const Vec3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3 &operator-=(const Vec3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }

constexpr double dot(const Vec3 &a, const Vec3 &b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm2(const Vec3 &a) { return dot(a, a); }
inline double norm(const Vec3 &a) { return std::sqrt(norm2(a)); }

inline Vec3 normalized(const Vec3 &a) { return a / norm(a); }

inline constexpr Vec3 e_x{1.0, 0.0, 0.0};
inline constexpr Vec3 e_y{0.0, 1.0, 0.0};
inline constexpr Vec3 e_z{0.0, 0.0, 1.0};

inline std::ostream &operator<<(std::ostream &os, const Vec3 &v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

} // namespace springmag
