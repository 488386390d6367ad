// SPDX-License-Identifier: Apache-2.0
#include "integration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <unsupported/Eigen/Polynomials>

#include "plapdg/quadrature.hpp"

namespace plapdg::verify::detail {

namespace {

// Globally adaptive Gauss-Kronrod over consecutive pieces, each mapped by
// t = a + (b - a)(3u^2 - 2u^3). The map is quadratic at both ends, so an
// endpoint factor |t - a|^s dt becomes u^{2s+1} du, smooth for the
// exponents met here. The interval with the largest error estimate is
// bisected until the total error is below rel_tol times the total L1
// norm; judging tiny pieces (between nearly coincident roots) against
// their own size would chase rounding noise.
Integral graded_sum(const std::function<double(double)>& f, const std::vector<double>& cuts, double rel_tol) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Cell {
    double err, value, l1, u0, u1;
    std::size_t piece;
    bool operator<(const Cell& o) const { return err < o.err; }
  };
  auto eval = [&](std::size_t piece, double u0, double u1) {
    const double a = cuts[piece], len = cuts[piece + 1] - cuts[piece];
    auto g = [&](double u) { return f(a + len * u * u * (3.0 - 2.0 * u)) * 6.0 * len * u * (1.0 - u); };
    Cell c{0.0, 0.0, 0.0, u0, u1, piece};
    c.value = Rule::integrate(g, u0, u1, 0, 0.0, &c.err, &c.l1);
    return c;
  };
  std::priority_queue<Cell> queue;
  double value = 0.0, err = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Cell c = eval(i, 0.0, 1.0);
    value += c.value;
    err += c.err;
    l1 += c.l1;
    queue.push(c);
  }
  constexpr int kMaxCells = 2000;
  int cells = static_cast<int>(queue.size());
  while (!queue.empty() && err > rel_tol * l1 && cells < kMaxCells) {
    const Cell c = queue.top();
    queue.pop();
    const double mid = 0.5 * (c.u0 + c.u1);
    const Cell left = eval(c.piece, c.u0, mid), right = eval(c.piece, mid, c.u1);
    value += left.value + right.value - c.value;
    err += left.err + right.err - c.err;
    l1 += left.l1 + right.l1 - c.l1;
    queue.push(left);
    queue.push(right);
    ++cells;
  }
  Integral out;
  out.value = value;
  out.converged = std::isfinite(value) && err <= std::max(rel_tol * l1, 1e-300);
  return out;
}

bool even_integer(double q) { return q == std::round(q) && std::fmod(q, 2.0) == 0.0 && q <= 16.0; }

// Real roots in (lo, hi) of the monomial series c, nearly real pairs included.
std::vector<double> monomial_roots(Eigen::VectorXd c, double lo, double hi, double imag_tol) {
  std::vector<double> out;
  const double scale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return out;
  int deg = static_cast<int>(c.size()) - 1;
  while (deg > 0 && std::abs(c[deg]) <= 1e-13 * scale) --deg;
  if (deg == 0) return out;
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(c.head(deg + 1));
  for (const auto& z : solver.roots()) {
    if (std::abs(z.imag()) <= imag_tol && z.real() > lo && z.real() < hi) out.push_back(z.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double horner(const Eigen::VectorXd& c, double t) {
  double s = 0.0;
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) s = s * t + c[i];
  return s;
}

// Coefficients of t -> sum_i a_i (mid + half t)^i.
Eigen::VectorXd affine_substitute(const Eigen::VectorXd& a, double mid, double half) {
  const Eigen::Index n = a.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd power = Eigen::VectorXd::Zero(n);  // (mid + half t)^i
  power[0] = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out += a[i] * power;
    for (Eigen::Index k = std::min(i + 1, n - 1); k >= 1; --k) power[k] = mid * power[k] + half * power[k - 1];
    power[0] *= mid;
  }
  return out;
}

// Points in (-1, 1) that split p into monotone pieces with no interior
// sign change: the critical points of p and the zeros between them, the
// latter bracketed and solved to full precision. Eigenvalue roots alone
// lose half their digits near double roots.
std::vector<double> monotone_cuts(const Eigen::VectorXd& p) {
  std::vector<double> nodes{-1.0};
  if (p.size() > 2) {
    Eigen::VectorXd dp(p.size() - 1);
    for (Eigen::Index i = 1; i < p.size(); ++i) dp[i - 1] = i * p[i];
    for (double t : monomial_roots(dp, -1.0, 1.0, 1e-3)) nodes.push_back(t);
  }
  nodes.push_back(1.0);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (i > 0) out.push_back(nodes[i]);
    const double a = nodes[i], b = nodes[i + 1];
    const double pa = horner(p, a), pb = horner(p, b);
    if (pa * pb < 0.0) {
      std::uintmax_t iters = 100;
      const auto [lo, hi] = boost::math::tools::toms748_solve([&](double t) { return horner(p, t); }, a, b, pa, pb,
                                                              boost::math::tools::eps_tolerance<double>(), iters);
      out.push_back(0.5 * (lo + hi));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Integral of |p(t)|^q over [-1, 1] for the monomial series p.
Integral abs_pow_local(const Eigen::VectorXd& p, double q, double rel_tol) {
  auto f = [&](double t) { return std::pow(std::abs(horner(p, t)), q); };
  Integral out;
  if (even_integer(q)) {
    // |p|^q is a polynomial of degree q * deg p
    const QuadRule& rule = cached_rule(Shape::Segment, static_cast<int>(q) * static_cast<int>(p.size() - 1));
    for (std::size_t i = 0; i < rule.size(); ++i) out.value += 2.0 * rule.weights[i] * f(2.0 * rule.points[i].x() - 1.0);
    return out;
  }
  std::vector<double> cuts{-1.0};
  for (double t : monotone_cuts(p)) {
    if (t - cuts.back() > 1e-15) cuts.push_back(t);
  }
  if (1.0 - cuts.back() <= 1e-15) cuts.back() = 1.0;
  else cuts.push_back(1.0);
  return graded_sum(f, cuts, rel_tol);
}

// y in (0, 1) where v(., y) gains or loses a pair of real roots. The
// discriminant in x changes sign exactly there, so sign changes of the
// Sylvester determinant of (v, dv/dx) are bracketed on a grid and solved
// to full precision. Two events inside one grid cell cancel and are
// missed; the outer quadrature then sees two close kinks, which costs
// time but not accuracy.
std::vector<double> discriminant_breaks(const BivariatePoly& v) {
  const double scale = v.c.cwiseAbs().maxCoeff();
  int m = v.r;
  while (m > 0 && v.c.row(m).cwiseAbs().maxCoeff() <= 1e-13 * scale) --m;
  if (m < 2) return {};
  const int size = 2 * m - 1;
  Eigen::MatrixXd S(size, size);
  auto disc = [&](double y) {
    const Eigen::VectorXd a = v.in_x(y);
    S.setZero();
    for (int i = 0; i < m - 1; ++i)
      for (int j = 0; j <= m; ++j) S(i, i + j) = a[m - j];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) S(m - 1 + i, i + j) = (m - j) * a[m - j];
    return S.partialPivLu().determinant();
  };
  const int cells = 8 * v.r * (v.r - 1) + 32;
  std::vector<double> out;
  double y0 = 0.0, d0 = disc(0.0);
  for (int k = 1; k <= cells; ++k) {
    const double y1 = static_cast<double>(k) / cells, d1 = disc(y1);
    if (d0 == 0.0) {
      if (y0 > 0.0) out.push_back(y0);
    } else if (d0 * d1 < 0.0) {
      std::uintmax_t iters = 200;
      const auto [lo, hi] =
          boost::math::tools::toms748_solve(disc, y0, y1, d0, d1, boost::math::tools::eps_tolerance<double>(), iters);
      out.push_back(0.5 * (lo + hi));
    }
    y0 = y1;
    d0 = d1;
  }
  return out;
}

}  // namespace

Integral integrate_abs_pow_1d(const std::function<double(double)>& v, int r, double a, double b, double q,
                              double rel_tol) {
  Integral out;
  if (!(b > a)) return out;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  // monomial coefficients in the local variable, interpolated at
  // Chebyshev nodes
  const int n = std::max(r, 0) + 1;
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double t = std::cos(std::numbers::pi * (i + 0.5) / n);
    double m = 1.0;
    for (int j = 0; j < n; ++j, m *= t) V(i, j) = m;
    y[i] = v(mid + half * t);
  }
  out = abs_pow_local(V.colPivHouseholderQr().solve(y), q, rel_tol);
  out.value *= half;
  return out;
}

double BivariatePoly::operator()(double x, double y) const { return horner(in_x(y), x); }

Eigen::VectorXd BivariatePoly::in_x(double y) const {
  Eigen::VectorXd a(r + 1);
  for (int i = 0; i <= r; ++i) {
    double s = 0.0;
    for (int j = r - i; j >= 0; --j) s = s * y + c(i, j);
    a[i] = s;
  }
  return a;
}

BivariatePoly BivariatePoly::fit(const std::function<double(const Vec2&)>& v, int r) {
  const QuadRule& rule = cached_rule(Shape::Triangle, 2 * r + 2);
  const int n = (r + 1) * (r + 2) / 2;
  Eigen::MatrixXd V(rule.size(), n);
  Eigen::VectorXd rhs(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Vec2& x = rule.points[k];
    int col = 0;
    for (int i = 0; i <= r; ++i)
      for (int j = 0; i + j <= r; ++j) V(k, col++) = std::pow(x.x(), i) * std::pow(x.y(), j);
    rhs[k] = v(x);
  }
  const Eigen::VectorXd sol = V.colPivHouseholderQr().solve(rhs);
  BivariatePoly out;
  out.r = r;
  out.c = Eigen::MatrixXd::Zero(r + 1, r + 1);
  int col = 0;
  for (int i = 0; i <= r; ++i)
    for (int j = 0; i + j <= r; ++j) out.c(i, j) = sol[col++];
  return out;
}

Integral integrate_abs_pow_triangle(const BivariatePoly& v, double q, double rel_tol) {
  if (even_integer(q)) {
    const QuadRule& rule = cached_rule(Shape::Triangle, std::max(static_cast<int>(q) * v.r, 1));
    Integral out;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      out.value += rule.weights[i] * std::pow(v(rule.points[i].x(), rule.points[i].y()), q);
    }
    return out;
  }
  std::vector<double> breaks{0.0, 1.0};
  if (v.r > 0) {
    // zeros on the edges x = 0 and x + y = 1, as polynomials in y
    Eigen::VectorXd left(v.r + 1);
    for (int j = 0; j <= v.r; ++j) left[j] = v.c(0, j);
    Eigen::VectorXd hyp = Eigen::VectorXd::Zero(v.r + 1);
    Eigen::VectorXd pw = Eigen::VectorXd::Zero(v.r + 1);  // (1 - y)^i
    pw[0] = 1.0;
    for (int i = 0; i <= v.r; ++i) {
      for (int j = 0; i + j <= v.r; ++j)
        for (int e = 0; e <= i; ++e) hyp[e + j] += v.c(i, j) * pw[e];
      for (int e = i + 1; e >= 1 && i < v.r; --e) pw[e] -= pw[e - 1];
    }
    for (double y : monomial_roots(left, 0.0, 1.0, 1e-6)) breaks.push_back(y);
    for (double y : monomial_roots(hyp, 0.0, 1.0, 1e-6)) breaks.push_back(y);
    for (double y : discriminant_breaks(v)) breaks.push_back(y);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return b - a <= 1e-12; }),
               breaks.end());
  if (breaks.back() < 1.0) breaks.back() = 1.0;

  bool inner_ok = true;
  auto line = [&](double y) {
    const double half = 0.5 * (1.0 - y);
    if (!(half > 0.0)) return 0.0;
    const Integral in = abs_pow_local(affine_substitute(v.in_x(y), half, half), q, rel_tol * 1e-2);
    inner_ok = inner_ok && in.converged;
    return half * in.value;
  };
  // Missed tangencies (two inside one grid cell) leave interior kinks,
  // which the adaptive rule absorbs by bisection.
  Integral out = graded_sum(line, breaks, rel_tol);
  out.converged = out.converged && inner_ok;
  return out;
}

Integral integrate_segment_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  double err = 0.0, l1 = 0.0;
  Integral out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel_tol, &err, &l1);
  out.converged = std::isfinite(out.value) && err <= std::max(10.0 * rel_tol * l1, 1e-300);
  return out;
}

namespace {

using Tri = std::array<Vec2, 3>;

double rule_on(const Tri& t, const QuadRule& rule, const std::function<double(const Vec2&)>& f) {
  const Vec2 e1 = t[1] - t[0], e2 = t[2] - t[0];
  const double det = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Vec2& x = rule.points[i];
    s += rule.weights[i] * f(t[0] + x.x() * e1 + x.y() * e2);
  }
  return s * det;
}

}  // namespace

Integral integrate_triangle_adaptive(const std::function<double(const Vec2&)>& f, int degree, double rel_tol,
                                     int max_cells) {
  const QuadRule& coarse = cached_rule(Shape::Triangle, degree);
  const QuadRule& fine = cached_rule(Shape::Triangle, std::min(2 * degree, kMaxQuadratureDegree));
  struct Cell {
    double err, value, l1;
    Tri t;
    bool operator<(const Cell& o) const { return err < o.err; }
  };
  auto abs_f = [&](const Vec2& x) { return std::abs(f(x)); };
  auto eval = [&](const Tri& t) {
    const double value = rule_on(t, fine, f);
    return Cell{std::abs(value - rule_on(t, coarse, f)), value, rule_on(t, fine, abs_f), t};
  };
  std::priority_queue<Cell> queue;
  queue.push(eval(Tri{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}));
  double value = queue.top().value, err = queue.top().err, l1 = queue.top().l1;
  int cells = 1;
  while (err > rel_tol * l1 && cells + 3 <= max_cells) {
    const Cell c = queue.top();
    queue.pop();
    const Tri& t = c.t;
    const Vec2 m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
    value -= c.value;
    err -= c.err;
    l1 -= c.l1;
    for (const Tri& k : {Tri{t[0], m01, m20}, Tri{m01, t[1], m12}, Tri{m20, m12, t[2]}, Tri{m12, m20, m01}}) {
      const Cell child = eval(k);
      value += child.value;
      err += child.err;
      l1 += child.l1;
      queue.push(child);
    }
    cells += 3;
  }
  Integral out;
  out.value = value;
  out.converged = std::isfinite(value) && err <= std::max(rel_tol * l1, 1e-300);
  return out;
}

}  // namespace plapdg::verify::detail
