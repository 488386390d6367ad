// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Full-size sweeps; expect roughly ten minutes on one core.
//
//   acceptance [criterion numbers...]   (default: all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "plapdg/experiments.hpp"
#include "plapdg/quadrature.hpp"
#include "plapdg/verify.hpp"
#include "support/sipg_oracle.hpp"

using namespace plapdg;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

std::string fmt(double v, const char* f = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// The default h-study (p = 5/2, 4, 9/2; r = 1, 2; levels 0..3) with one
// worker; criteria 1, 2 and 9 read it.
StudyConfig h_study_config() {
  StudyConfig c = default_study(StudyKind::H, 1);
  c.levels = {0, 1, 2, 3};
  return c;
}

const ConvergenceReport& h_study() {
  static const ConvergenceReport rep = [] {
    setenv("PLAPDG_THREADS", "1", 1);
    ConvergenceReport r = run_h_study(h_study_config());
    unsetenv("PLAPDG_THREADS");
    return r;
  }();
  return rep;
}

void describe_failures(const ConvergenceReport& rep, Outcome& o) {
  for (const ConvergenceCell& c : rep.cells) {
    if (!c.converged) o.require(false, "p=" + c.p.str() + " r=" + std::to_string(c.r) + " j=" + std::to_string(c.level) + ": " + c.failure);
  }
}

Outcome criterion1() {
  Outcome o;
  const ConvergenceReport& rep = h_study();
  describe_failures(rep, o);
  for (const char* ps : {"5/2", "4"}) {
    for (int r : {1, 2}) {
      const auto s = rep.slope(parse_exponent(ps), r, ErrorKind::QuasiNorm);
      o.require(s && s->points == 4, std::string("series p=") + ps + " r=" + std::to_string(r) + " incomplete");
      if (!s) continue;
      o.detail << " p=" << ps << ",r=" << r << ":" << fmt(s->fit.slope, "%.3f");
      o.require(s->fit.slope >= r - 0.25 && s->fit.slope <= r + 0.4,
                std::string("slope outside [r-0.25, r+0.4] for p=") + ps + " r=" + std::to_string(r));
    }
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const ConvergenceReport& rep = h_study();
  const auto lo = rep.slope(parse_exponent("5/2"), 2, ErrorKind::BrokenNorm);
  const auto hi = rep.slope(parse_exponent("9/2"), 2, ErrorKind::BrokenNorm);
  o.require(lo && hi, "missing series");
  if (lo && hi) {
    o.detail << " broken-norm slopes r=2: p=5/2 " << fmt(lo->fit.slope, "%.3f") << ", p=9/2 " << fmt(hi->fit.slope, "%.3f");
    o.require(hi->fit.slope <= lo->fit.slope + 0.1, "slope(9/2) > slope(5/2) + 0.1");
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  StudyConfig c = default_study(StudyKind::P, 1);
  c.r_values = {1, 2, 3, 4, 5};
  c.h0 = 0.2;
  const ConvergenceReport rep = run_p_study(c);
  describe_failures(rep, o);
  for (const RationalExponent& p : c.p_values) {
    std::vector<const ConvergenceCell*> cells;
    for (const ConvergenceCell& cell : rep.cells) {
      if (cell.p == p && cell.converged) cells.push_back(&cell);
    }
    o.require(cells.size() == 5, "p=" + p.str() + " incomplete");
    if (cells.size() != 5) continue;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      o.require(cells[i]->quasi_norm_error < cells[i - 1]->quasi_norm_error,
                "p=" + p.str() + " quasi-norm error not decreasing at r=" + std::to_string(cells[i]->r));
      o.require(cells[i]->broken_norm_error < cells[i - 1]->broken_norm_error,
                "p=" + p.str() + " broken-norm error not decreasing at r=" + std::to_string(cells[i]->r));
    }
    const double ratio = cells[4]->quasi_norm_error / cells[0]->quasi_norm_error;
    o.require(ratio <= 1e-2, "p=" + p.str() + " quasi(r=5)/quasi(r=1) > 1e-2");
    o.detail << " p=" << p.str() << ": e5/e1=" << fmt(ratio);
    for (ErrorKind e : {ErrorKind::QuasiNorm, ErrorKind::BrokenNorm}) {
      const auto s = rep.slope(p, 0, e);
      o.require(s.has_value(), "missing fit");
      if (!s) continue;
      o.detail << " R2(" << to_string(e) << ")=" << fmt(s->fit.r_squared, "%.3f");
      o.require(s->fit.r_squared >= 0.9, "p=" + p.str() + " " + std::string(to_string(e)) + " R^2 < 0.9");
    }
  }
  return o;
}

void add_report(Outcome& o, const verify::CheckReport& r, double& worst, std::int64_t& samples,
                std::int64_t& excluded) {
  samples += r.samples;
  excluded += r.excluded;
  worst = std::max(worst, r.max_ratio);
  if (!r.passed()) {
    o.require(false, r.lemma + " " + r.params.dump() + ": " + std::to_string(r.violations) + " violations, max ratio " +
                         fmt(r.max_ratio, "%.12g"));
  }
}

Outcome criterion4() {
  Outcome o;
  const std::uint64_t seed = 2024;
  {
    double worst = 0;
    std::int64_t n = 0, ex = 0;
    for (int r = 0; r <= 8; ++r) add_report(o, verify::check_markov(r, 10000, seed), worst, n, ex);
    o.detail << " markov(r<=8,1e4):" << fmt(worst, "%.4f");
  }
  {
    double worst = 0;
    std::int64_t n = 0, ex = 0;
    for (int r = 0; r <= 6; ++r) add_report(o, verify::check_interval_lemma(r, 1000, seed), worst, n, ex);
    o.detail << " interval(r<=6,1e3):" << fmt(worst, "%.4f");
  }
  for (int d : {1, 2}) {
    double worst = 0;
    std::int64_t n = 0, ex = 0;
    for (int r = 0; r <= 5; ++r) {
      for (double q : {0.5, 1.0, 2.0, 3.5}) add_report(o, verify::check_trace_inverse(d, r, q, 1000, seed), worst, n, ex);
    }
    o.detail << " trace d=" << d << "(1e3):" << fmt(worst, "%.4f") << " excl " << ex;
    o.require(n > 0, "no usable trace samples");
  }
  {
    double worst = 0;
    std::int64_t n = 0, ex = 0;
    for (const char* p : {"5/2", "3", "4", "9/2"}) {
      for (int r = 1; r <= 4; ++r) add_report(o, verify::check_qn_trace_inverse(parse_exponent(p), r, 1000, seed), worst, n, ex);
    }
    o.detail << " qn-trace(1e3):" << fmt(worst, "%.4f") << " excl " << ex;
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  // the level-1 mesh of the h-study hierarchy
  auto mesh = std::make_shared<const TriMesh>(refine_uniform(build_structured_mesh(Rect{}, 0.2)));
  auto space = std::make_shared<const DgSpace>(mesh, 2);
  auto cache = std::make_shared<const QuadratureCache>(space);
  PenaltyOptions opt;
  opt.mode = PenaltyMode::Theoretical;
  opt.theta = -1.0;
  const NonlinearFormContext ctx(cache, build_penalty(*space, parse_exponent("4"), opt));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  int violations = 0;
  double min_ratio = INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd c(space->num_dofs());
    for (auto& x : c) x = n01(rng);
    c /= c.norm();
    const DgFunction u(space, c);
    const double lhs = energy(ctx, u);
    const double rhs = 0.5 * std::pow(broken_norm(ctx, BrokenField::of(u), 4.0), 4.0);
    min_ratio = std::min(min_ratio, lhs / rhs);
    if (!(lhs >= rhs)) ++violations;
  }
  o.detail << " 200 samples, " << violations << " violations, min B/(|||u|||^p/2)=" << fmt(min_ratio, "%.4g");
  o.require(violations == 0, "coercivity violated");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const ScalarField exact = manufactured_solution(1);
  auto mesh = std::make_shared<const TriMesh>(build_structured_mesh(Rect{}, 0.2));
  auto space = std::make_shared<const DgSpace>(mesh, 2);
  auto cache = std::make_shared<const QuadratureCache>(space);
  double worst = 0;
  for (const char* ps : {"5/2", "4", "9/2"}) {
    const RationalExponent p = parse_exponent(ps);
    const NonlinearFormContext ctx(cache, build_penalty(*space, p, PenaltyOptions{}));
    const Eigen::VectorXd load = load_vector(ctx, forcing_fn(exact, p.value()));
    std::mt19937_64 rng(600 + p.num);
    std::normal_distribution<double> n01;
    auto random_vec = [&] {
      Eigen::VectorXd v(space->num_dofs());
      for (auto& x : v) x = n01(rng);
      return v;
    };
    for (int s = 0; s < 20; ++s) {
      const DgFunction u(space, random_vec());
      const Eigen::SparseMatrix<double> J = jacobian(ctx, u);
      for (int d = 0; d < 20; ++d) {
        const Eigen::VectorXd h = random_vec();
        const double t = 1e-6;
        const Eigen::VectorXd fd = (residual(ctx, DgFunction(space, u.coefficients() + t * h), load) -
                                    residual(ctx, DgFunction(space, u.coefficients() - t * h), load)) /
                                   (2 * t);
        worst = std::max(worst, (J * h - fd).norm() / fd.norm());
      }
    }
  }
  o.detail << " 3 x 20 x 20 products, worst relative deviation " << fmt(worst);
  o.require(worst <= 1e-5, "Jacobian-vector product deviates by more than 1e-5");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const ScalarField exact = manufactured_solution(1);
  const ScalarFn f = forcing_fn(exact, 2.0);
  double worst = 0;
  for (int r : {1, 2, 3}) {
    for (double theta : {-1.0, 0.0, 1.0}) {
      auto mesh = std::make_shared<const TriMesh>(build_structured_mesh(Rect{}, 0.2));
      auto space = std::make_shared<const DgSpace>(mesh, r);
      auto cache = std::make_shared<const QuadratureCache>(space);
      PenaltyOptions opt;
      opt.theta = theta;
      const NonlinearFormContext ctx(cache, build_penalty(*space, parse_exponent("2", true), opt));
      const NewtonResult res = newton_solve(ctx, f, DgFunction(space));
      // same rule degree as load_vector, so only the assembly paths differ
      const int degree = std::min(2 * cache->element_degree(0), kMaxQuadratureDegree);
      const auto sys = testing::assemble_sipg(*space, ctx.penalty(), theta, f, degree);
      const Eigen::VectorXd ref = testing::solve_sipg(sys);
      worst = std::max(worst, (res.u.coefficients() - ref).norm() / ref.norm());
    }
  }
  o.detail << " coefficients vs independent SIPG: " << fmt(worst);
  o.require(worst <= 1e-10, "p = 2 solution differs from the SIPG oracle");

  StudyConfig c = default_study(StudyKind::H, 1);
  c.p_values = {parse_exponent("2", true)};
  c.r_values = {1, 2};
  c.levels = {1, 2, 3};
  const ConvergenceReport rep = run_h_study(c);
  describe_failures(rep, o);
  for (int r : {1, 2}) {
    const auto s = rep.slope(c.p_values[0], r, ErrorKind::BrokenNorm);
    o.require(s && s->points == 3, "missing p = 2 series");
    if (!s) continue;
    o.detail << " H1-type slope r=" << r << ":" << fmt(s->fit.slope, "%.3f");
    o.require(std::abs(s->fit.slope - r) <= 0.2, "H1-type slope outside r +- 0.2 for r=" + std::to_string(r));
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (double p : {2.5, 4.0, 4.5}) {
    for (const verify::CheckReport& r : verify::check_algebraic(p, 100000, 808)) {
      o.require(r.passed() && r.samples >= 100000,
                r.lemma + " p=" + fmt(p) + ": " + std::to_string(r.violations) + " violations");
    }
  }
  o.detail << " algebraic: 4 inequalities x 3 p x 1e5 samples;";
  for (double p : {2.5, 4.0, 4.5}) {
    double c1lo = INFINITY, c1hi = 0, c2lo = INFINITY, c2hi = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const verify::Lemma21Constants c = verify::estimate_lemma21_constants(p, 1000000, seed);
      c1lo = std::min(c1lo, c.c1);
      c1hi = std::max(c1hi, c.c1);
      c2lo = std::min(c2lo, c.c2);
      c2hi = std::max(c2hi, c.c2);
    }
    const double s1 = (c1hi - c1lo) / c1lo, s2 = (c2hi - c2lo) / c2lo;
    o.detail << " p=" << fmt(p) << " C1~" << fmt(c1hi, "%.4g") << " C2~" << fmt(c2lo, "%.4g") << " spread "
             << fmt(std::max(s1, s2), "%.2e");
    o.require(std::isfinite(s1) && std::isfinite(s2) && s1 <= 0.02 && s2 <= 0.02,
              "lemma constants spread above 2% at p=" + fmt(p));
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  setenv("PLAPDG_THREADS", "1", 1);
  const ConvergenceReport again = run_h_study(h_study_config());
  unsetenv("PLAPDG_THREADS");
  const std::string a = errors_csv(h_study()), b = errors_csv(again);
  o.detail << " default study-h, " << again.cells.size() << " cells, errors.csv " << a.size() << " bytes";
  o.require(a == b, "errors.csv differs between runs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"quasi-norm h-convergence", criterion1},   {"norm-error ordering in p", criterion2},
      {"p-version decay", criterion3},            {"inverse-estimate certification", criterion4},
      {"coercivity", criterion5},                 {"Jacobian vs finite differences", criterion6},
      {"linear-mode oracle", criterion7},         {"algebraic lemmas", criterion8},
      {"determinism", criterion9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first << "):"
              << o.detail.str() << " [" << fmt(secs, "%.1f") << " s]" << std::endl;
  }
  return all ? 0 : 1;
}
