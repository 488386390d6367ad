// SPDX-License-Identifier: Apache-2.0
#include "plapdg/solver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/SparseLU>

#ifdef PLAPDG_HAVE_UMFPACK
#include <umfpack.h>
#endif

namespace plapdg {

namespace {

enum class Backend { kUmfpack, kSparseLu };

// A factorization that can be applied repeatedly for refinement.
class Factorization {
 public:
  Factorization(const SparseSystem& A, Backend backend) : A_(A), backend_(backend) {
    A_.makeCompressed();
#ifdef PLAPDG_HAVE_UMFPACK
    if (backend_ == Backend::kUmfpack) {
      umfpack_di_defaults(control_);
      double info[UMFPACK_INFO];
      const int n = static_cast<int>(A_.rows());
      int status = umfpack_di_symbolic(n, n, A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(), &symbolic_,
                                       control_, info);
      if (status != UMFPACK_OK) fail("symbolic factorization", status, std::numeric_limits<double>::quiet_NaN());
      status = umfpack_di_numeric(A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(), symbolic_, &numeric_,
                                  control_, info);
      rcond_ = info[UMFPACK_RCOND];
      if (status == UMFPACK_WARNING_singular_matrix) fail("matrix is singular", status, rcond_);
      if (status != UMFPACK_OK) fail("numeric factorization", status, rcond_);
      return;
    }
#endif
    lu_.compute(A_);
    if (lu_.info() != Eigen::Success) {
      throw LinearSolveError("linear_solve: " + lu_.lastErrorMessage() + " (rcond 0)", 0.0);
    }
    // Eigen's SparseLU has no condition estimate; the spread of the
    // pivots is a cheap stand-in.
    // The supernodes hold the diagonal of U alongside L.
    const auto& L = lu_.matrixL().m_mapL;
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (Eigen::Index j = 0; j < A_.cols(); ++j) {
      for (std::remove_cvref_t<decltype(L)>::InnerIterator it(L, j); it; ++it) {
        if (it.row() != j) continue;
        dmin = std::min(dmin, std::abs(it.value()));
        dmax = std::max(dmax, std::abs(it.value()));
      }
    }
    rcond_ = dmax > 0.0 ? dmin / dmax : 0.0;
  }

  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  ~Factorization() {
#ifdef PLAPDG_HAVE_UMFPACK
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
#endif
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
#ifdef PLAPDG_HAVE_UMFPACK
    if (backend_ == Backend::kUmfpack) {
      Eigen::VectorXd x(b.size());
      double info[UMFPACK_INFO];
      double control[UMFPACK_CONTROL];
      std::copy(control_, control_ + UMFPACK_CONTROL, control);
      control[UMFPACK_IRSTEP] = 0;  // refinement is done by the caller
      const int status = umfpack_di_solve(UMFPACK_A, A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(),
                                          x.data(), b.data(), numeric_, control, info);
      if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) fail("solve", status, rcond_);
      return x;
    }
#endif
    return lu_.solve(b);
  }

  double rcond() const { return rcond_; }
  const char* backend() const { return backend_ == Backend::kUmfpack ? "umfpack" : "eigen-sparselu"; }

 private:
  [[noreturn]] static void fail(const char* stage, int status, double rcond) {
    std::ostringstream msg;
    msg << "linear_solve: " << stage << " failed (status " << status << ", rcond " << rcond << ")";
    throw LinearSolveError(msg.str(), rcond);
  }

  SparseSystem A_;
  Backend backend_;
  double rcond_ = 0.0;
#ifdef PLAPDG_HAVE_UMFPACK
  double control_[UMFPACK_CONTROL];
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
#endif
  Eigen::SparseLU<SparseSystem> lu_;
};

struct Attempt {
  Eigen::VectorXd x;
  double rel;
  double backward;
  int refinements;
  double rcond;
  const char* backend;
};

// Normwise backward error ||r||_inf / (||A||_inf ||x||_inf + ||b||_inf):
// the relative perturbation of (A, b) that x solves exactly.
double backward_error(const SparseSystem& A, double a_inf, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double denom = a_inf * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double r = (b - A * x).lpNorm<Eigen::Infinity>();
  return denom > 0.0 ? r / denom : r;
}

double inf_norm(const SparseSystem& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (Eigen::Index j = 0; j < A.outerSize(); ++j) {
    for (SparseSystem::InnerIterator it(A, j); it; ++it) rows[it.row()] += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

Attempt factor_and_refine(const SparseSystem& A, const Eigen::VectorXd& b, double tol, Backend backend) {
  const Factorization lu(A, backend);
  const double bnorm = b.norm();
  auto rel_of = [&](const Eigen::VectorXd& x) { return bnorm > 0.0 ? (b - A * x).norm() / bnorm : (A * x).norm(); };
  Eigen::VectorXd x = lu.solve(b);
  double rel = rel_of(x);
  int refinements = 0;
  constexpr int kMaxRefinements = 5;
  while (rel > tol && refinements < kMaxRefinements) {
    const Eigen::VectorXd x_new = x + lu.solve(b - A * x);
    const double rel_new = rel_of(x_new);
    ++refinements;
    if (!(rel_new < rel)) break;
    x = x_new;
    rel = rel_new;
  }
  const double backward = backward_error(A, inf_norm(A), x, b);
  return {std::move(x), rel, backward, refinements, lu.rcond(), lu.backend()};
}

// A solve whose refinement stalled above tol is still accepted when its
// backward error is at rounding level: no solver working in double does
// better, and the residual floor then reflects conditioning alone.
constexpr double kBackwardErrorFloor = 64.0 * std::numeric_limits<double>::epsilon();

bool acceptable(const Attempt& a, double tol) {
  return std::isfinite(a.rel) && (a.rel <= tol || a.backward <= kBackwardErrorFloor);
}

// Set once UMFPACK failed (singular, or a solution refinement could not
// repair) on a system SparseLU solved. Seen with OpenBLAS kernels that miscompute on
// some virtualized AVX-512 hosts; later solves skip UMFPACK.
std::atomic<bool> umfpack_unreliable{false};

double now_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

Eigen::VectorXd linear_solve(const SparseSystem& A, const Eigen::VectorXd& b, double tol, LinearSolveInfo* info) {
  if (A.rows() != A.cols()) throw std::invalid_argument("linear_solve: matrix is not square");
  if (A.rows() != b.size()) throw std::invalid_argument("linear_solve: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("linear_solve: tol must be positive");
  if (b.size() == 0) return b;

  Backend first = Backend::kSparseLu;
#ifdef PLAPDG_HAVE_UMFPACK
  if (!umfpack_unreliable.load(std::memory_order_relaxed)) first = Backend::kUmfpack;
#endif
  std::optional<Attempt> at;
  std::optional<LinearSolveError> first_error;
  try {
    at = factor_and_refine(A, b, tol, first);
  } catch (const LinearSolveError& e) {
    if (first != Backend::kUmfpack) throw;
    first_error = e;
  }
  // A singular or unrepairable UMFPACK result is cross-checked with SparseLU.
  if (first == Backend::kUmfpack && !(at && acceptable(*at, tol))) {
    try {
      Attempt alt = factor_and_refine(A, b, tol, Backend::kSparseLu);
      if (acceptable(alt, tol)) {
        umfpack_unreliable.store(true, std::memory_order_relaxed);
        at = std::move(alt);
      }
    } catch (const LinearSolveError&) {
    }
    if (!at) throw *first_error;
  }
  if (info) *info = {at->rcond, at->rel, at->backward, at->refinements, at->backend};
  if (!acceptable(*at, tol)) {
    std::ostringstream msg;
    msg << "linear_solve: relative residual " << at->rel << " above " << tol << " (backward error "
        << at->backward << ") after " << at->refinements << " refinement steps (rcond " << at->rcond << ")";
    throw LinearSolveError(msg.str(), at->rcond);
  }
  return std::move(at->x);
}

void SolveOptions::validate() const {
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (!(linear_tol > 0.0)) throw std::invalid_argument("linear_tol must be positive");
  if (max_newton_iters < 0) throw std::invalid_argument("max_newton_iters must be >= 0");
  if (continuation_step.num <= 0 || continuation_step.den <= 0) {
    throw std::invalid_argument("continuation_step must be positive");
  }
}

int SolveStats::total_newton_iters() const {
  int n = 0;
  for (const StageStats& s : stages) n += s.newton_iters;
  return n;
}

NewtonResult newton_solve(const NonlinearFormContext& ctx, const Eigen::VectorXd& load, const DgFunction& u0,
                          const SolveOptions& opts) {
  opts.validate();
  if (&u0.space() != &ctx.space()) throw std::invalid_argument("newton_solve: u0 is not in the context's space");
  const double t0 = now_ms();

  StageStats stats;
  stats.q = ctx.penalty().p;
  DgFunction u = u0;
  Eigen::VectorXd r = residual(ctx, u, load);
  double rnorm = r.norm();
  DgFunction best = u;
  double best_norm = rnorm;
  stats.residual_history.push_back(rnorm);

  auto finish = [&] {
    stats.final_residual = best_norm;
    stats.wall_ms = now_ms() - t0;
  };

  while (!(rnorm <= opts.newton_tol)) {
    if (stats.newton_iters >= opts.max_newton_iters || !std::isfinite(rnorm)) {
      finish();
      std::ostringstream msg;
      msg << "newton_solve: no convergence at q = " << stats.q.str() << " after " << stats.newton_iters
          << " iterations (best residual " << best_norm << ")";
      throw NewtonFailure(msg.str(), best, stats);
    }
    Eigen::VectorXd du;
    try {
      du = linear_solve(jacobian(ctx, u), -r, opts.linear_tol);
    } catch (const LinearSolveError& e) {
      finish();
      std::ostringstream msg;
      msg << "newton_solve: Jacobian solve failed at q = " << stats.q.str() << " in iteration "
          << stats.newton_iters + 1 << ": " << e.what();
      throw NewtonFailure(msg.str(), best, stats);
    }

    DgFunction trial(u.space_ptr(), u.coefficients() + du);
    Eigen::VectorXd r_trial;
    double trial_norm = std::numeric_limits<double>::infinity();
    auto try_step = [&](double step) {
      trial.coefficients() = u.coefficients() + step * du;
      try {
        r_trial = residual(ctx, trial, load);
        trial_norm = r_trial.norm();
      } catch (const AssemblyError&) {
        trial_norm = std::numeric_limits<double>::infinity();
      }
    };
    try_step(1.0);
    if (opts.line_search && !(trial_norm < rnorm)) {
      double step = 1.0;
      bool decreased = false;
      for (int h = 0; h < 20 && !decreased; ++h) {
        step *= 0.5;
        ++stats.halvings;
        try_step(step);
        decreased = trial_norm < rnorm;
      }
      // plain Newton when backtracking finds no decrease
      if (!decreased) try_step(1.0);
    }
    if (!std::isfinite(trial_norm)) {
      finish();
      std::ostringstream msg;
      msg << "newton_solve: non-finite residual at q = " << stats.q.str() << " in iteration " << stats.newton_iters + 1;
      throw NewtonFailure(msg.str(), best, stats);
    }
    u = std::move(trial);
    r = std::move(r_trial);
    rnorm = trial_norm;
    ++stats.newton_iters;
    stats.residual_history.push_back(rnorm);
    if (rnorm < best_norm) {
      best = u;
      best_norm = rnorm;
    }
  }
  finish();
  return {std::move(u), std::move(stats)};
}

NewtonResult newton_solve(const NonlinearFormContext& ctx, const ScalarFn& f, const DgFunction& u0,
                          const SolveOptions& opts) {
  return newton_solve(ctx, load_vector(ctx, f), u0, opts);
}

std::vector<RationalExponent> continuation_schedule(const RationalExponent& p_target, Rational step) {
  if (step.num <= 0 || step.den <= 0) throw std::invalid_argument("continuation step must be positive");
  if (p_target.linear()) throw std::invalid_argument("continuation target must exceed 2");
  std::vector<RationalExponent> out;
  // q_j = 2 + j num/den = (2 den + j num)/den; compare with p = a/b by
  // cross-multiplication.
  const std::int64_t a = p_target.num, b = p_target.den;
  for (std::int64_t j = 0;; ++j) {
    const std::int64_t qn = 2 * step.den + j * step.num, qd = step.den;
    if (qn * b >= a * qd) break;
    out.push_back(rationalize_exponent(qn, qd, true));
  }
  out.push_back(p_target);
  return out;
}

ContinuationResult continuation_solve(std::shared_ptr<const QuadratureCache> cache, const PenaltyBuilder& penalty,
                                      const RationalExponent& p_target, const StageForcing& forcing,
                                      const SolveOptions& opts, double delta) {
  opts.validate();
  ContinuationResult out{DgFunction(cache->space_ptr()), {}};
  for (const RationalExponent& q : continuation_schedule(p_target, opts.continuation_step)) {
    const NonlinearFormContext ctx(cache, penalty(q), delta);
    NewtonResult stage = newton_solve(ctx, forcing(q), out.u, opts);
    out.u = std::move(stage.u);
    out.stats.stages.push_back(std::move(stage.stats));
  }
  return out;
}

PenaltyBuilder penalty_builder(std::shared_ptr<const DgSpace> space, PenaltyOptions options) {
  return [space = std::move(space), options](const RationalExponent& q) { return build_penalty(*space, q, options); };
}

}  // namespace plapdg
