// SPDX-License-Identifier: Apache-2.0
//
// Randomized certification of the inverse estimates and algebraic
// inequalities the penalty construction relies on. Every check samples
// with per-sample seeds splitmix64(seed + i), so reports are independent
// of the worker count.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "plapdg/exponent.hpp"

namespace plapdg::verify {

/// A sample violates the bound when LHS/RHS exceeds 1 + kRatioTolerance.
constexpr double kRatioTolerance = 1e-10;

struct CheckReport {
  std::string lemma;
  std::int64_t samples = 0;
  std::int64_t violations = 0;
  /// Samples whose integrals did not reach the requested accuracy; they are
  /// not counted as samples or violations.
  std::int64_t excluded = 0;
  /// Candidate violations that vanished when re-integrated at higher
  /// accuracy.
  std::int64_t unconfirmed = 0;
  double max_ratio = 0.0;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  /// Check-specific extras (secondary bounds, estimator outputs).
  nlohmann::json extra = nlohmann::json::object();

  bool passed() const { return violations == 0; }
  nlohmann::json to_json() const;
};

// ---- one-dimensional polynomial checks ------------------------------------
// Polynomials on [0, 1] are given by coefficients in the shifted Legendre
// basis P_n(2x - 1).

/// ||v'||_inf / (2 r^2 ||v||_inf) for the polynomial with these coefficients
/// (r = coefficient count - 1). Zero for constants.
double markov_ratio(std::span<const double> legendre_coeffs);

/// (||v||_inf / 2) / min_{I} |v| for the interval I of half-width
/// 1/(2(1 + 2r^2)) around the maximizer; +inf when |I| is too short.
double interval_lemma_ratio(std::span<const double> legendre_coeffs);

CheckReport check_markov(int r, std::int64_t n_samples, std::uint64_t seed);
CheckReport check_interval_lemma(int r, std::int64_t n_samples, std::uint64_t seed);

// ---- trace-inverse estimates ----------------------------------------------

/// Trace inverse constant 2^{q+1} C_inv,d (2r^2 + 1) / d with C_inv = 1, 4, 8
/// for d = 1, 2, 3 (multiply by |F|/|K|).
double trace_inverse_constant(int d, int r, double q);

/// LHS/RHS of one evaluation; unconverged integrals mark it unusable.
struct SampleRatio {
  double ratio = 0.0;
  bool converged = true;
};

/// Trace inverse ratio on [0, L] (independent of L) for a shifted Legendre
/// series, maximized over both endpoints.
SampleRatio trace_inverse_ratio_interval(std::span<const double> legendre_coeffs, double q, double rel_tol = 1e-10);

/// Trace inverse ratio on the image of the reference triangle under x -> J x,
/// for a polynomial given by reference basis coefficients, maximized over
/// the three faces. `r` is the degree entering the constant.
SampleRatio trace_inverse_ratio_triangle(std::span<const double> basis_coeffs, int r, const Eigen::Matrix2d& J,
                                         double q, double rel_tol = 1e-10);

/// L^q trace inverse estimate on random intervals (d = 1) or random
/// shape-regular triangles (d = 2), all faces, q > 0.
CheckReport check_trace_inverse(int d, int r, double q, std::int64_t n_samples, std::uint64_t seed);

/// Constant of the quasi-norm trace inverse estimate, as stated for the
/// lemma: 2^{p/2+1/k} C_inv,d (2 p^2 k^2 (r-1)^2 + 1) / d.
double qn_lemma_constant(const RationalExponent& p, int r, int d = 2);
/// The grouping used in the penalty: 2^{p/2+1/k} C_inv,d p^2 k^2 (2(r-1)^2 + 1) / d.
double qn_penalty_constant(const RationalExponent& p, int r, int d = 2);

/// Quasi-norm trace ratio for the pair (w, v) of degree-r polynomials on
/// J(reference triangle), maximized over faces, against `constant`.
SampleRatio qn_trace_ratio_triangle(const RationalExponent& p, int r, std::span<const double> w_coeffs,
                                    std::span<const double> v_coeffs, const Eigen::Matrix2d& J, double constant,
                                    double rel_tol = 1e-10);

/// Quasi-norm trace inverse estimate for random pairs (w, v) on random
/// triangles. Violations are counted against qn_lemma_constant; the maximum
/// ratio against qn_penalty_constant is reported in extra.
CheckReport check_qn_trace_inverse(const RationalExponent& p, int r, std::int64_t n_samples, std::uint64_t seed);

// ---- algebraic inequalities -----------------------------------------------

struct Lemma21Constants {
  double c1 = 0.0;  // max observed ratio; under-estimates the true constant
  double c2 = 0.0;  // min observed ratio; over-estimates the true constant
  std::int64_t samples = 0;
  std::int64_t skipped = 0;  // y == z
};

/// Empirical constants of the two p-structure inequalities, sampled over
/// a in [0, 10], |y|, |z| <= 10 plus near-degenerate cases.
Lemma21Constants estimate_lemma21_constants(double p, std::int64_t n_samples, std::uint64_t seed);

/// Estimate with a fixed budget (10^5 samples, seed 1), memoized per p.
Lemma21Constants cached_lemma21_constants(const RationalExponent& p);

/// Young-type inequalities and the quasi-triangle inequality; one report
/// per inequality ("young_original", "young", "young_gamma", "quasi_triangle").
std::vector<CheckReport> check_algebraic(double p, std::int64_t n_samples, std::uint64_t seed);

}  // namespace plapdg::verify
