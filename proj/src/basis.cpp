// SPDX-License-Identifier: Apache-2.0
#include "plapdg/basis.hpp"

#include <cassert>
#include <cmath>

namespace plapdg {

namespace {

constexpr int kMaxBasisDegree = 32;

// Q_n(x, y) = s^n P_n((2x - s)/s), s = 1 - y, with first derivatives.
// (n+1) Q_{n+1} = (2n+1)(2x - s) Q_n - n s^2 Q_{n-1}.
void homogeneous_legendre(int r, double x, double y, double* q, double* qx, double* qy) {
  const double s = 1.0 - y;
  const double a = 2.0 * x - s;
  q[0] = 1.0;
  qx[0] = 0.0;
  qy[0] = 0.0;
  if (r == 0) return;
  q[1] = a;
  qx[1] = 2.0;
  qy[1] = 1.0;
  for (int n = 1; n < r; ++n) {
    const double c1 = (2.0 * n + 1.0) / (n + 1.0);
    const double c2 = static_cast<double>(n) / (n + 1.0);
    q[n + 1] = c1 * a * q[n] - c2 * s * s * q[n - 1];
    qx[n + 1] = c1 * (2.0 * q[n] + a * qx[n]) - c2 * s * s * qx[n - 1];
    qy[n + 1] = c1 * (q[n] + a * qy[n]) - c2 * (-2.0 * s * q[n - 1] + s * s * qy[n - 1]);
  }
}

// Jacobi P_n^{(alpha, 0)}(t) for n = 0..m and d/dt.
void jacobi_alpha0(int m, double alpha, double t, double* p, double* dp) {
  p[0] = 1.0;
  dp[0] = 0.0;
  if (m == 0) return;
  p[1] = (alpha + 1.0) + (alpha + 2.0) * (t - 1.0) / 2.0;
  dp[1] = (alpha + 2.0) / 2.0;
  for (int n = 2; n <= m; ++n) {
    const double k = 2.0 * n + alpha;
    const double a0 = 2.0 * n * (n + alpha) * (k - 2.0);
    const double a1 = (k - 1.0) * k * (k - 2.0);
    const double a2 = (k - 1.0) * alpha * alpha;
    const double a3 = 2.0 * (n + alpha - 1.0) * (n - 1.0) * k;
    p[n] = ((a1 * t + a2) * p[n - 1] - a3 * p[n - 2]) / a0;
    dp[n] = (a1 * p[n - 1] + (a1 * t + a2) * dp[n - 1] - a3 * dp[n - 2]) / a0;
  }
}

}  // namespace

void eval_reference_basis(int r, const Vec2& point, std::span<double> values, std::span<double> dx,
                          std::span<double> dy) {
  assert(r >= 0 && r <= kMaxBasisDegree);
  assert(static_cast<int>(values.size()) >= basis_size(r));
  double q[kMaxBasisDegree + 1], qx[kMaxBasisDegree + 1], qy[kMaxBasisDegree + 1];
  double p[kMaxBasisDegree + 1], dp[kMaxBasisDegree + 1];
  const double x = point.x(), y = point.y();
  homogeneous_legendre(r, x, y, q, qx, qy);
  const double t = 2.0 * y - 1.0;

  int b = 0;
  for (int n = 0; n <= r; ++n) {
    for (int i = n; i >= 0; --i) {
      const int j = n - i;
      jacobi_alpha0(j, 2.0 * i + 1.0, t, p, dp);
      const double c = std::sqrt(2.0 * (2.0 * i + 1.0) * (i + j + 1.0));
      values[b] = c * q[i] * p[j];
      dx[b] = c * qx[i] * p[j];
      dy[b] = c * (qy[i] * p[j] + q[i] * 2.0 * dp[j]);
      ++b;
    }
  }
}

BasisTable reference_basis(int r, std::span<const Vec2> points) {
  BasisTable t;
  t.degree = r;
  t.num_basis = basis_size(r);
  t.num_points = static_cast<int>(points.size());
  const std::size_t n = static_cast<std::size_t>(t.num_basis) * points.size();
  t.values.resize(n);
  t.dx.resize(n);
  t.dy.resize(n);
  std::vector<double> v(t.num_basis), gx(t.num_basis), gy(t.num_basis);
  for (int q = 0; q < t.num_points; ++q) {
    eval_reference_basis(r, points[q], v, gx, gy);
    for (int b = 0; b < t.num_basis; ++b) {
      t.values[b * t.num_points + q] = v[b];
      t.dx[b * t.num_points + q] = gx[b];
      t.dy[b * t.num_points + q] = gy[b];
    }
  }
  return t;
}

}  // namespace plapdg
