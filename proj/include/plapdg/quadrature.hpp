// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

#include "plapdg/mesh.hpp"

namespace plapdg {

enum class Shape { Segment, Triangle };

/// Quadrature on the reference segment [0, 1] (points use the x component
/// only) or the reference triangle {x, y >= 0, x + y <= 1}.
struct QuadRule {
  Shape shape = Shape::Segment;
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return weights.size(); }
};

constexpr int kMaxQuadratureDegree = 120;

/// Gauss-Legendre on segments; collapsed (Duffy) Gauss-Legendre tensor
/// rules on triangles. Throws std::invalid_argument above
/// kMaxQuadratureDegree.
QuadRule quadrature_rule(Shape shape, int degree);

/// Shared, lazily built rule. Thread-safe; the reference stays valid for
/// the life of the program.
const QuadRule& cached_rule(Shape shape, int degree);

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace plapdg
