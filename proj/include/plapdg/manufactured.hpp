// SPDX-License-Identifier: Apache-2.0
// Closed-form exact solutions with exact derivatives, and the forcing that
// makes them solve -div(|grad u|^{p-2} grad u) = f.
#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Core>

#include "plapdg/assembly.hpp"
#include "plapdg/mesh.hpp"

namespace plapdg {

/// Second-order forward-mode number in two variables: value, gradient and
/// Hessian propagated together.
struct Dual2 {
  double v = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();

  Dual2() = default;
  Dual2(double c) : v(c) {}  // NOLINT: constants promote implicitly
  static Dual2 variable(double x, int i) {
    Dual2 d(x);
    d.g[i] = 1.0;
    return d;
  }
};

// Chain rule for a scalar function with derivatives f0, f1, f2 at a.v.
inline Dual2 chain(const Dual2& a, double f0, double f1, double f2) {
  Dual2 r;
  r.v = f0;
  r.g = f1 * a.g;
  r.h = f1 * a.h + f2 * a.g * a.g.transpose();
  return r;
}

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}
inline Dual2 operator-(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}
inline Dual2 operator-(const Dual2& a) { return Dual2(0.0) - a; }
inline Dual2 operator*(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}
inline Dual2 operator/(const Dual2& a, const Dual2& b) { return a * chain(b, 1.0 / b.v, -1.0 / (b.v * b.v), 2.0 / (b.v * b.v * b.v)); }
inline Dual2 sin(const Dual2& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Dual2 cos(const Dual2& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Dual2 exp(const Dual2& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Dual2 tanh(const Dual2& a) {
  const double t = std::tanh(a.v), s = 1.0 - t * t;
  return chain(a, t, s, -2.0 * t * s);
}

/// Value, gradient and Hessian at a point.
struct Jet {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

class ScalarField {
 public:
  using Expr = std::function<Dual2(const Dual2&, const Dual2&)>;

  ScalarField(Expr expr, Rect domain, bool zero_on_boundary)
      : expr_(std::move(expr)), domain_(domain), zero_on_boundary_(zero_on_boundary) {}

  Jet operator()(const Vec2& x) const;
  double value(const Vec2& x) const { return (*this)(x).value; }
  const Rect& domain() const { return domain_; }
  bool zero_on_boundary() const { return zero_on_boundary_; }

  /// Value and gradient in the form the assembly consumes.
  AnalyticField analytic() const;

 private:
  Expr expr_;
  Rect domain_;
  bool zero_on_boundary_;
};

/// 1: x y (1-x)(1-y) sin(2 pi x y) on (0,1)^2.
/// 2: -(1-x^2)(1-y^2) tanh(50((x-1/2)^2 + y^2 - 0.01)) on (-1,1)^2.
ScalarField manufactured_solution(int example);

/// Gradients at or below this magnitude give f = 0.
constexpr double kForcingGradientFloor = 1e-14;

/// f = -(p-2)|grad u|^{p-4} grad u^T H grad u - |grad u|^{p-2} lap u;
/// p = 2 gives -lap u. Throws std::invalid_argument for p < 2.
double forcing(const ScalarField& u, double p, const Vec2& x);

/// The forcing as a callable for load assembly.
ScalarFn forcing_fn(const ScalarField& u, double p);

}  // namespace plapdg
