// SPDX-License-Identifier: Apache-2.0
// Accurate integrals of non-smooth functions of polynomials, used only by
// the certification checks.
#pragma once

#include <functional>

#include <Eigen/Core>

#include "plapdg/mesh.hpp"

namespace plapdg::verify::detail {

struct Integral {
  double value = 0.0;
  bool converged = true;
};

/// Integral of |v(t)|^q over [a, b] for a polynomial v of degree <= r.
/// The interval is split at the real roots and critical points of v, and
/// each piece is integrated under a substitution that flattens the
/// |t - t0|^q endpoint behaviour.
Integral integrate_abs_pow_1d(const std::function<double(double)>& v, int r, double a, double b, double q,
                              double rel_tol);

/// Polynomial of total degree <= r in monomial form, c(i, j) x^i y^j.
struct BivariatePoly {
  int r = 0;
  Eigen::MatrixXd c;

  double operator()(double x, double y) const;
  /// Coefficients in x of v(., y).
  Eigen::VectorXd in_x(double y) const;
  /// Least-squares fit of a function known to be such a polynomial.
  static BivariatePoly fit(const std::function<double(const Vec2&)>& v, int r);
};

/// Integral of |v|^q over the reference triangle. The outer integral in y
/// is split where the zero set of v meets the edges x = 0, x + y = 1 or
/// has a vertical tangent (sign changes of the discriminant in x), so every
/// piece is smooth inside and only endpoint singularities remain.
Integral integrate_abs_pow_triangle(const BivariatePoly& v, double q, double rel_tol);

/// Integral of f over the reference triangle, globally adaptive: the cell
/// whose rules of degree d and 2d disagree most is split 4-way until the
/// total disagreement is below rel_tol times the integral of |f|.
Integral integrate_triangle_adaptive(const std::function<double(const Vec2&)>& f, int degree, double rel_tol,
                                     int max_cells = 20000);

/// Adaptive Gauss-Kronrod on [a, b].
Integral integrate_segment_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol);

}  // namespace plapdg::verify::detail
