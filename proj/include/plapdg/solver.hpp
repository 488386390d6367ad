// SPDX-License-Identifier: Apache-2.0
// Newton-Raphson for B(u; u, v) = (f, v), with continuation in the exponent.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "plapdg/assembly.hpp"

namespace plapdg {

using SparseSystem = Eigen::SparseMatrix<double>;

class LinearSolveError : public std::runtime_error {
 public:
  LinearSolveError(const std::string& what, double rcond) : std::runtime_error(what), rcond_(rcond) {}
  /// Reciprocal condition estimate of the factorization (NaN if unknown).
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

struct LinearSolveInfo {
  double rcond = 0.0;
  double relative_residual = 0.0;
  double backward_error = 0.0;  // normwise, infinity norms
  int refinements = 0;
  const char* backend = "";
};

/// Direct sparse LU (UMFPACK when available, Eigen::SparseLU otherwise)
/// followed by iterative refinement until ||Ax - b|| <= tol ||b||. When
/// refinement stalls above tol the result is kept only if its normwise
/// backward error is at rounding level (64 eps). Throws LinearSolveError
/// for singular factorizations and for stalls above that.
Eigen::VectorXd linear_solve(const SparseSystem& A, const Eigen::VectorXd& b, double tol = 1e-12,
                             LinearSolveInfo* info = nullptr);

/// Positive rational a/b.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 2;
};

struct SolveOptions {
  double newton_tol = 1e-10;  // absolute l2 norm of the residual vector
  int max_newton_iters = 50;
  bool line_search = true;
  Rational continuation_step{1, 2};
  double linear_tol = 1e-12;

  /// Throws std::invalid_argument on non-positive tolerances or step.
  void validate() const;
};

struct StageStats {
  RationalExponent q;
  int newton_iters = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;  // ||r|| before each step, then the final value
  int halvings = 0;                      // line-search halvings over the stage
  double wall_ms = 0.0;
};

struct SolveStats {
  std::vector<StageStats> stages;
  int total_newton_iters() const;
};

/// Newton did not reach newton_tol, or a Jacobian solve failed (e.g. the
/// degenerate Jacobian at u = 0 for p > 2). Carries the iterate with the
/// smallest residual and the history of the failing stage.
class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, DgFunction best, StageStats stage)
      : std::runtime_error(what), best_(std::move(best)), stage_(std::move(stage)) {}
  const DgFunction& best_iterate() const { return best_; }
  const StageStats& stage() const { return stage_; }

 private:
  DgFunction best_;
  StageStats stage_;
};

struct NewtonResult {
  DgFunction u;
  StageStats stats;
};

/// Solves residual(ctx, u, load) = 0 from u0. Each step solves J du = -r;
/// with line_search the step is halved (at most 20 times) until the
/// residual norm decreases, and taken in full if it never does.
NewtonResult newton_solve(const NonlinearFormContext& ctx, const Eigen::VectorXd& load, const DgFunction& u0,
                          const SolveOptions& opts = {});
NewtonResult newton_solve(const NonlinearFormContext& ctx, const ScalarFn& f, const DgFunction& u0,
                          const SolveOptions& opts = {});

/// 2, 2 + s, 2 + 2s, ... below p_target, then p_target. Exact rationals.
std::vector<RationalExponent> continuation_schedule(const RationalExponent& p_target, Rational step = {1, 2});

using PenaltyBuilder = std::function<PenaltyField(const RationalExponent& q)>;
/// Forcing of the stage with exponent q.
using StageForcing = std::function<ScalarFn(const RationalExponent& q)>;

struct ContinuationResult {
  DgFunction u;
  SolveStats stats;
};

/// Solves the q-Laplacian for every q of the schedule, each stage warm
/// started from the previous solution with the penalty rebuilt for q. The
/// quadrature cache is shared by all stages. A failing stage throws
/// NewtonFailure naming its q.
ContinuationResult continuation_solve(std::shared_ptr<const QuadratureCache> cache, const PenaltyBuilder& penalty,
                                      const RationalExponent& p_target, const StageForcing& forcing,
                                      const SolveOptions& opts = {}, double delta = 1e-12);

/// Builder for build_penalty with fixed options.
PenaltyBuilder penalty_builder(std::shared_ptr<const DgSpace> space, PenaltyOptions options);

}  // namespace plapdg
