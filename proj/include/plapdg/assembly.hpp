// SPDX-License-Identifier: Apache-2.0
//
// The nonlinear form
//
//   B(z; u, v) = int_K |grad u|^{p-2} grad u . grad v
//              + int_G sigma {{ (|grad z|^2 + sigma^2 [u]^2)^{(p-2)/2} }}_w [u][v]
//              - int_G {{ |grad u|^{p-2} grad u }}_w . n [v]
//              + theta int_G {{ (|grad z|^2 + sigma^2 [u]^2)^{(p-2)/2} grad v }}_w . n [u]
//
// with [u] = u+ - u- across each interface (n points out of the plus
// element) and the boundary convention u- = 0, w = (1, 0). The discrete
// problem is B(u; u, v) = (f, v), so residual() and jacobian() take z = u.
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "plapdg/dg_space.hpp"
#include "plapdg/penalty.hpp"

namespace plapdg {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarFn = std::function<double(const Vec2&)>;

struct FieldSample {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
};
/// A globally smooth field, sampled pointwise (exact solutions).
using AnalyticField = std::function<FieldSample(const Vec2&)>;

/// Element-wise evaluable field e = discrete + analytic_coefficient * analytic.
/// Either part may be absent.
struct BrokenField {
  const DgFunction* discrete = nullptr;
  AnalyticField analytic;
  double analytic_coefficient = 1.0;

  static BrokenField of(const DgFunction& u) { return {&u, {}, 1.0}; }
  static BrokenField of(AnalyticField g) { return {nullptr, std::move(g), 1.0}; }
  /// u_h - g
  static BrokenField difference(const DgFunction& u, AnalyticField g) { return {&u, std::move(g), -1.0}; }
};

struct QuadratureOptions {
  /// Element rule degree is multiplier * (3 r_K + 4); face rules use the
  /// maximum over the adjacent elements. A positive `fixed_degree` overrides.
  int multiplier = 1;
  int fixed_degree = 0;
};

/// Physical basis tables at the quadrature points of every element and
/// interface. Geometry only, so one cache serves every exponent and penalty.
class QuadratureCache {
 public:
  QuadratureCache(std::shared_ptr<const DgSpace> space, QuadratureOptions options = {});

  struct Element {
    int nq = 0;
    int nb = 0;
    std::vector<double> weights;  // rule weight * |det J|
    std::vector<Vec2> points;     // physical
    std::vector<double> values, gx, gy;  // nb x nq
  };
  /// Rows are the plus basis functions followed by the minus ones. Tables
  /// for one side are zero on the other side's rows.
  struct Face {
    int nq = 0;
    int n_plus = 0;
    int n_minus = 0;
    Vec2 normal = Vec2::Zero();
    std::vector<double> weights;  // rule weight * |F|
    std::vector<Vec2> points;
    std::vector<double> jump;            // +phi on plus rows, -phi on minus rows
    std::vector<double> gx_plus, gy_plus, gn_plus;
    std::vector<double> gx_minus, gy_minus, gn_minus;
    int rows() const { return n_plus + n_minus; }
  };

  const DgSpace& space() const { return *space_; }
  const std::shared_ptr<const DgSpace>& space_ptr() const { return space_; }
  const QuadratureOptions& options() const { return options_; }
  const Element& element(int k) const { return elements_[k]; }
  const Face& face(int f) const { return faces_[f]; }
  int element_degree(int k) const;
  int face_degree(int f) const;

 private:
  std::shared_ptr<const DgSpace> space_;
  QuadratureOptions options_;
  std::vector<Element> elements_;
  std::vector<Face> faces_;
};

/// Selects which terms of the form are active; the full form by default.
struct FormTerms {
  bool volume = true;
  bool penalty = true;
  bool consistency = true;
  bool symmetry = true;  // the theta term
};

/// Everything B needs: the cached space, the penalty (which carries p and
/// theta), and the gradient floor delta used where |g|^{p-4} appears in
/// the linearization.
class NonlinearFormContext {
 public:
  NonlinearFormContext(std::shared_ptr<const QuadratureCache> cache, PenaltyField penalty, double delta = 1e-12,
                       FormTerms terms = {});

  const QuadratureCache& cache() const { return *cache_; }
  const std::shared_ptr<const QuadratureCache>& cache_ptr() const { return cache_; }
  const DgSpace& space() const { return cache_->space(); }
  const PenaltyField& penalty() const { return penalty_; }
  double p() const { return penalty_.p.value(); }
  double theta() const { return penalty_.theta; }
  double delta() const { return delta_; }
  const FormTerms& terms() const { return terms_; }

 private:
  std::shared_ptr<const QuadratureCache> cache_;
  PenaltyField penalty_;
  double delta_;
  FormTerms terms_;
};

/// (f, phi_i)
Eigen::VectorXd load_vector(const NonlinearFormContext& ctx, const ScalarFn& f);

/// B(u; u, phi_i) - load_i. Throws AssemblyError naming the element or
/// interface when an integrand is not finite.
Eigen::VectorXd residual(const NonlinearFormContext& ctx, const DgFunction& u, const Eigen::VectorXd& load);
Eigen::VectorXd residual(const NonlinearFormContext& ctx, const DgFunction& u, const ScalarFn& f);

/// B(u; u, phi_i) - (f, phi_i) for any broken field u; with u the exact
/// solution this measures the consistency defect (jumps of u vanish, so z
/// plays no role).
Eigen::VectorXd consistency_defect(const NonlinearFormContext& ctx, const BrokenField& u, const ScalarFn& f);

/// d residual_i / d u_j, both slots of B linearized.
Eigen::SparseMatrix<double> jacobian(const NonlinearFormContext& ctx, const DgFunction& u);

/// B(u; u, u), evaluated directly.
double energy(const NonlinearFormContext& ctx, const DgFunction& u);

/// ( int (|grad w| + |grad e|)^{p-2} |grad e|^2
///   + int_G sigma {{ (|grad w| + sigma |[e]|)^{p-2} }}_w [e]^2 )^{1/2}
double quasi_norm(const NonlinearFormContext& ctx, const BrokenField& e, const DgFunction& weight);

/// ( int |grad e|^q + int_G sigma^{q-1} |[e]|^q )^{1/q}
double broken_norm(const NonlinearFormContext& ctx, const BrokenField& e, double q);

/// ( int |grad e|^2 )^{1/2}
double broken_h1_seminorm(const NonlinearFormContext& ctx, const BrokenField& e);

}  // namespace plapdg
