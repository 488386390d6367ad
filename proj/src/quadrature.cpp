// SPDX-License-Identifier: Apache-2.0
#include "plapdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace plapdg {

namespace {

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadRule quadrature_rule(Shape shape, int degree) {
  if (degree < 0) degree = 0;
  if (degree > kMaxQuadratureDegree) {
    throw std::invalid_argument("quadrature degree " + std::to_string(degree) + " exceeds maximum " +
                                std::to_string(kMaxQuadratureDegree));
  }
  QuadRule rule;
  rule.shape = shape;
  std::vector<double> x, w;
  if (shape == Shape::Segment) {
    const int n = degree / 2 + 1;
    gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(0.5 * (x[i] + 1.0), 0.0);
      rule.weights.push_back(0.5 * w[i]);
    }
    rule.exactness_degree = 2 * n - 1;
    return rule;
  }

  // (s, t) in [0,1]^2 -> (s (1 - t), t), Jacobian (1 - t); the t direction
  // carries one extra degree.
  const int ns = degree / 2 + 1;
  const int nt = (degree + 1) / 2 + 1;
  std::vector<double> xs, ws, xt, wt;
  gauss_legendre(ns, xs, ws);
  gauss_legendre(nt, xt, wt);
  for (int j = 0; j < nt; ++j) {
    const double t = 0.5 * (xt[j] + 1.0);
    for (int i = 0; i < ns; ++i) {
      const double s = 0.5 * (xs[i] + 1.0);
      rule.points.emplace_back(s * (1.0 - t), t);
      rule.weights.push_back(0.25 * ws[i] * wt[j] * (1.0 - t));
    }
  }
  rule.exactness_degree = std::min(2 * ns - 1, 2 * nt - 2);
  return rule;
}

const QuadRule& cached_rule(Shape shape, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{static_cast<int>(shape), degree}];
  if (!slot) slot = std::make_unique<QuadRule>(quadrature_rule(shape, degree));
  return *slot;
}

}  // namespace plapdg
