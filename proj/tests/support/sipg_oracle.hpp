// SPDX-License-Identifier: Apache-2.0
// Textbook symmetric interior penalty assembly for -lap u = f, written
// without the nonlinear form's caches: every face point is pulled back into
// each adjacent element separately. Used as an independent reference.
#pragma once

#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "plapdg/dg_space.hpp"
#include "plapdg/penalty.hpp"

namespace plapdg::testing {

struct SipgSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// a(u, v) = sum_K int grad u . grad v
///         + sum_F int sigma [u][v] - {grad u}_w . n [v] + theta {grad v}_w . n [u]
/// with the sigma and weights taken from `penalty`.
SipgSystem assemble_sipg(const DgSpace& space, const PenaltyField& penalty, double theta,
                         const std::function<double(const Vec2&)>& f, int quad_degree);

Eigen::VectorXd solve_sipg(const SipgSystem& system);

}  // namespace plapdg::testing
