#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace renorm {

template <class Real>
struct Vec3 {
  std::array<Real, 3> x{Real(0), Real(0), Real(0)};

  Vec3() = default;
  Vec3(Real a, Real b, Real c) : x{a, b, c} {}

  Real& operator[](std::size_t d) { return x[d]; }
  const Real& operator[](std::size_t d) const { return x[d]; }

  Vec3& operator+=(const Vec3& o) {
    for (std::size_t d = 0; d < 3; ++d) x[d] += o.x[d];
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    for (std::size_t d = 0; d < 3; ++d) x[d] -= o.x[d];
    return *this;
  }
  Vec3& operator*=(const Real& s) {
    for (auto& e : x) e *= s;
    return *this;
  }

  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(Vec3 a, const Real& s) { return a *= s; }
  friend Vec3 operator*(const Real& s, Vec3 a) { return a *= s; }
  friend bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x; }
};

template <class Real>
Real dot(const Vec3<Real>& a, const Vec3<Real>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class Real>
Real norm(const Vec3<Real>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

}  // namespace renorm
