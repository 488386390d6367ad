// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "plapdg/mesh.hpp"

namespace plapdg {

/// Number of polynomials of total degree <= r in two variables.
constexpr int basis_size(int r) { return (r + 1) * (r + 2) / 2; }

/// Values and reference gradients of the L2-orthonormal modal basis on the
/// reference triangle, tabulated at a point set. Storage is basis-major:
/// entry (b, q) lives at b * num_points + q, so each basis function is a
/// contiguous row over the points.
struct BasisTable {
  int degree = 0;
  int num_basis = 0;
  int num_points = 0;
  std::vector<double> values;
  std::vector<double> dx;
  std::vector<double> dy;

  double value(int b, int q) const { return values[b * num_points + q]; }
  const double* value_row(int b) const { return values.data() + b * num_points; }
};

/// Orthonormal basis of P_r on the reference triangle (Dubiner/Koornwinder
/// construction, hierarchical in the total degree). The collapsed-coordinate
/// factors are evaluated through recurrences in the homogeneous variables,
/// so values and gradients are regular at the collapsed vertex.
BasisTable reference_basis(int r, std::span<const Vec2> points);

/// Single point variant; values, dx and dy must have basis_size(r) entries.
void eval_reference_basis(int r, const Vec2& point, std::span<double> values, std::span<double> dx,
                          std::span<double> dy);

}  // namespace plapdg
