// SPDX-License-Identifier: Apache-2.0
#include "plapdg/manufactured.hpp"

#include <numbers>
#include <stdexcept>

namespace plapdg {

Jet ScalarField::operator()(const Vec2& x) const {
  const Dual2 d = expr_(Dual2::variable(x.x(), 0), Dual2::variable(x.y(), 1));
  return {d.v, d.g, d.h};
}

AnalyticField ScalarField::analytic() const {
  return [self = *this](const Vec2& x) {
    const Jet j = self(x);
    return FieldSample{j.value, j.grad};
  };
}

ScalarField manufactured_solution(int example) {
  switch (example) {
    case 1:
      return ScalarField(
          [](const Dual2& x, const Dual2& y) {
            return x * y * (1.0 - x) * (1.0 - y) * sin(2.0 * std::numbers::pi * x * y);
          },
          Rect{0.0, 0.0, 1.0, 1.0}, true);
    case 2:
      return ScalarField(
          [](const Dual2& x, const Dual2& y) {
            const Dual2 s = (x - 0.5) * (x - 0.5) + y * y - 0.01;
            return -((1.0 - x * x) * (1.0 - y * y) * tanh(50.0 * s));
          },
          Rect{-1.0, -1.0, 1.0, 1.0}, true);
    default:
      throw std::invalid_argument("unknown example " + std::to_string(example) + " (expected 1 or 2)");
  }
}

double forcing(const ScalarField& u, double p, const Vec2& x) {
  if (p < 2.0) throw std::invalid_argument("forcing: p must be >= 2");
  const Jet j = u(x);
  const double lap = j.hessian.trace();
  if (p == 2.0) return -lap;
  const double n = j.grad.norm();
  if (n <= kForcingGradientFloor) return 0.0;
  const double gHg = j.grad.dot(j.hessian * j.grad);
  return -(p - 2.0) * std::pow(n, p - 4.0) * gHg - std::pow(n, p - 2.0) * lap;
}

ScalarFn forcing_fn(const ScalarField& u, double p) {
  if (p < 2.0) throw std::invalid_argument("forcing: p must be >= 2");
  return [u, p](const Vec2& x) { return forcing(u, p, x); };
}

}  // namespace plapdg
