// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "plapdg/experiments.hpp"

namespace plapdg {

std::string_view to_string(StudyKind kind) { return kind == StudyKind::H ? "h" : "p"; }
std::string_view to_string(ErrorKind kind) { return kind == ErrorKind::QuasiNorm ? "quasi_norm" : "broken_norm"; }
std::string_view to_string(FitScale scale) { return scale == FitScale::LogLog ? "loglog" : "semilogy"; }

void StudyConfig::validate() const {
  if (example != 1 && example != 2) throw std::invalid_argument("example must be 1 or 2");
  if (p_values.empty()) throw std::invalid_argument("study needs at least one p");
  if (r_values.empty()) throw std::invalid_argument("study needs at least one r");
  for (int r : r_values) {
    if (r < 1) throw std::invalid_argument("polynomial degree must be >= 1");
  }
  if (kind == StudyKind::H) {
    if (levels.empty()) throw std::invalid_argument("h-study needs at least one level");
    for (int j : levels) {
      if (j < 0 || j > 6) throw std::invalid_argument("refinement level must be in 0..6");
    }
  }
  if (!(h0 > 0.0)) throw std::invalid_argument("h0 must be positive");
  if (penalty.theta != -1.0 && penalty.theta != 0.0 && penalty.theta != 1.0) {
    throw std::invalid_argument("theta must be -1, 0 or 1");
  }
  if (!(penalty.scale > 0.0)) throw std::invalid_argument("penalty_scale must be positive");
  if (quadrature_multiplier < 1) throw std::invalid_argument("quadrature multiplier must be >= 1");
  solver.validate();
}

StudyConfig default_study(StudyKind kind, int example) {
  StudyConfig c;
  c.kind = kind;
  c.example = example;
  c.p_values = {parse_exponent("5/2"), parse_exponent("4"), parse_exponent("9/2")};
  if (kind == StudyKind::H) {
    c.r_values = {1, 2};
  } else {
    c.r_values = {1, 2, 3, 4, 5};
    c.levels = {0};
  }
  return c;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points, FitScale scale) {
  if (points.size() < 2) throw std::invalid_argument("fit_slope needs at least two points");
  std::vector<double> xs, ys;
  for (const auto& [x, y] : points) {
    if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("fit_slope needs positive finite y");
    if (scale == FitScale::LogLog && !(x > 0.0)) throw std::invalid_argument("loglog fit needs positive x");
    xs.push_back(scale == FitScale::LogLog ? std::log(x) : x);
    ys.push_back(std::log(y));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: all x values coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

bool ConvergenceReport::all_converged() const {
  return std::all_of(cells.begin(), cells.end(), [](const ConvergenceCell& c) { return c.converged; });
}

std::optional<StudySlope> ConvergenceReport::slope(const RationalExponent& p, int r, ErrorKind error) const {
  for (const StudySlope& s : slopes) {
    if (s.p == p && s.error == error && (config.kind == StudyKind::P || s.r == r)) return s;
  }
  return std::nullopt;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool exponent_less(const RationalExponent& a, const RationalExponent& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

}  // namespace

ConvergenceCell run_cell(const StudyConfig& config, const RationalExponent& p, int r,
                         std::shared_ptr<const TriMesh> mesh) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScalarField exact = manufactured_solution(config.example);
  ConvergenceCell cell;
  cell.example = config.example;
  cell.p = p;
  cell.r = r;
  cell.h = mesh->h_max();

  const auto space = std::make_shared<const DgSpace>(mesh, r);
  cell.num_dofs = space->num_dofs();
  QuadratureOptions qopts;
  qopts.multiplier = config.quadrature_multiplier;
  const auto cache = std::make_shared<const QuadratureCache>(space, qopts);
  const PenaltyBuilder penalty = penalty_builder(space, config.penalty);

  DgFunction u_h(space);
  try {
    if (p.linear()) {
      const NonlinearFormContext ctx(cache, penalty(p));
      NewtonResult res = newton_solve(ctx, forcing_fn(exact, 2.0), u_h, config.solver);
      u_h = std::move(res.u);
      cell.newton_iters = res.stats.newton_iters;
    } else {
      ContinuationResult res = continuation_solve(
          cache, penalty, p, [&](const RationalExponent& q) { return forcing_fn(exact, q.value()); }, config.solver);
      u_h = std::move(res.u);
      cell.newton_iters = res.stats.total_newton_iters();
    }
    cell.converged = true;
  } catch (const NewtonFailure& e) {
    cell.failure = e.what();
    u_h = e.best_iterate();
  } catch (const std::exception& e) {
    cell.failure = e.what();
  }

  if (cell.converged) {
    const NonlinearFormContext ctx(cache, penalty(p));
    const BrokenField err = BrokenField::difference(u_h, exact.analytic());
    cell.quasi_norm_error = quasi_norm(ctx, err, u_h);
    cell.broken_norm_error = broken_norm(ctx, err, p.value());
  }
  if (config.timings) cell.wall_ms = elapsed_ms(t0);
  return cell;
}

ConvergenceReport run_h_study(const StudyConfig& config) {
  StudyConfig c = config;
  c.kind = StudyKind::H;
  c.validate();
  ConvergenceReport report{c, {}, {}};
  const Rect domain = manufactured_solution(c.example).domain();

  std::vector<int> levels = c.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // nested meshes: level j is the level-0 mesh refined j times
  std::map<int, std::shared_ptr<const TriMesh>> meshes;
  TriMesh m = build_structured_mesh(domain, c.h0);
  for (int j = 0; j <= levels.back(); ++j) {
    if (j > 0) m = refine_uniform(m);
    if (std::binary_search(levels.begin(), levels.end(), j)) meshes[j] = std::make_shared<const TriMesh>(m);
  }

  std::vector<RationalExponent> ps = c.p_values;
  std::sort(ps.begin(), ps.end(), exponent_less);
  std::vector<int> rs = c.r_values;
  std::sort(rs.begin(), rs.end());
  for (const RationalExponent& p : ps) {
    for (int r : rs) {
      for (int j : levels) {
        ConvergenceCell cell = run_cell(c, p, r, meshes.at(j));
        cell.level = j;
        report.cells.push_back(std::move(cell));
      }
    }
  }
  fit_slopes(report);
  return report;
}

ConvergenceReport run_p_study(const StudyConfig& config) {
  StudyConfig c = config;
  c.kind = StudyKind::P;
  c.validate();
  ConvergenceReport report{c, {}, {}};
  const auto mesh =
      std::make_shared<const TriMesh>(build_structured_mesh(manufactured_solution(c.example).domain(), c.h0));
  std::vector<RationalExponent> ps = c.p_values;
  std::sort(ps.begin(), ps.end(), exponent_less);
  std::vector<int> rs = c.r_values;
  std::sort(rs.begin(), rs.end());
  for (const RationalExponent& p : ps) {
    for (int r : rs) report.cells.push_back(run_cell(c, p, r, mesh));
  }
  fit_slopes(report);
  return report;
}

ConvergenceReport run_study(const StudyConfig& config) {
  return config.kind == StudyKind::H ? run_h_study(config) : run_p_study(config);
}

void fit_slopes(ConvergenceReport& report) {
  report.slopes.clear();
  const bool h_study = report.config.kind == StudyKind::H;
  // series key: (p, r) for an h-study, p alone for a p-study
  std::vector<std::pair<RationalExponent, int>> keys;
  for (const ConvergenceCell& c : report.cells) {
    const std::pair<RationalExponent, int> key{c.p, h_study ? c.r : 0};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [p, r] : keys) {
    for (ErrorKind kind : {ErrorKind::QuasiNorm, ErrorKind::BrokenNorm}) {
      std::vector<std::pair<double, double>> pts;
      for (const ConvergenceCell& c : report.cells) {
        if (!(c.p == p) || (h_study && c.r != r) || !c.converged) continue;
        const double e = kind == ErrorKind::QuasiNorm ? c.quasi_norm_error : c.broken_norm_error;
        if (!(e > 0.0)) continue;
        pts.emplace_back(h_study ? c.h : static_cast<double>(c.r), e);
      }
      if (pts.size() < 2) continue;
      StudySlope s;
      s.p = p;
      s.r = r;
      s.error = kind;
      s.scale = h_study ? FitScale::LogLog : FitScale::SemiLogY;
      s.points = static_cast<int>(pts.size());
      s.fit = fit_slope(pts, s.scale);
      report.slopes.push_back(s);
    }
  }
}

}  // namespace plapdg
