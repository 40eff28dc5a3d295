#pragma once

#include <array>
#include <cmath>

#include "domain.hpp"

namespace twofluid {

using Vec2 = std::array<cplx, 2>;

// 2x2 complex matrix, row major: [[a, b], [c, d]]
struct Mat2 {
  cplx a{}, b{}, c{}, d{};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  cplx det() const { return a * d - b * c; }
  cplx trace() const { return a + d; }

  Vec2 operator*(const Vec2& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }
  Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  Mat2 operator+(const Mat2& m) const { return {a + m.a, b + m.b, c + m.c, d + m.d}; }
  Mat2 operator-(const Mat2& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
  Mat2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }

  Mat2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }

  double norm() const { return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d)); }

  /// throws SingularError when |det| <= tol * scale^2
  Mat2 inverse(double tol = 1e-14) const {
    const cplx dt = det();
    const double s = std::max(norm(), 1e-300);
    if (std::abs(dt) <= tol * s * s) throw SingularError("singular 2x2 system");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  Vec2 solve(const Vec2& rhs, double tol = 1e-14) const { return inverse(tol) * rhs; }
};

inline Vec2 operator+(const Vec2& x, const Vec2& y) { return {x[0] + y[0], x[1] + y[1]}; }
inline Vec2 operator-(const Vec2& x, const Vec2& y) { return {x[0] - y[0], x[1] - y[1]}; }
inline Vec2 operator*(cplx s, const Vec2& x) { return {s * x[0], s * x[1]}; }
inline double vnorm(const Vec2& x) { return std::sqrt(std::norm(x[0]) + std::norm(x[1])); }
// sum x_i * y_i without conjugation
inline cplx dot(const Vec2& x, const Vec2& y) { return x[0] * y[0] + x[1] * y[1]; }

}  // namespace twofluid
