// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "plapdg/experiments.hpp"

using namespace plapdg;

namespace {

constexpr double kPi = std::numbers::pi;

// Hand-derived gradients, independent of the dual numbers.
Vec2 grad_example1(const Vec2& x) {
  const double a = x.x(), b = x.y();
  const double g = a * (1 - a) * b * (1 - b);
  const double s = std::sin(2 * kPi * a * b), c = std::cos(2 * kPi * a * b);
  return {(1 - 2 * a) * b * (1 - b) * s + g * 2 * kPi * b * c, a * (1 - a) * (1 - 2 * b) * s + g * 2 * kPi * a * c};
}

Vec2 grad_example2(const Vec2& x) {
  const double a = x.x(), b = x.y();
  const double t = std::tanh(50 * ((a - 0.5) * (a - 0.5) + b * b - 0.01));
  const double d = 50 * (1 - t * t);
  const double P = (1 - a * a) * (1 - b * b);
  return {-(-2 * a * (1 - b * b) * t + P * d * 2 * (a - 0.5)), -(-2 * b * (1 - a * a) * t + P * d * 2 * b)};
}

// -div(|grad u|^{p-2} grad u) by the fourth-order central difference of the flux.
double flux_divergence(Vec2 (*grad)(const Vec2&), double p, const Vec2& x, double h) {
  auto flux = [&](const Vec2& y, int i) {
    const Vec2 g = grad(y);
    return std::pow(g.norm(), p - 2) * g[i];
  };
  double div = 0.0;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e[i] = h;
    div += (-flux(x + 2 * e, i) + 8 * flux(x + e, i) - 8 * flux(x - e, i) + flux(x - 2 * e, i)) / (12 * h);
  }
  return -div;
}

Vec2 random_point(const Rect& d, std::mt19937_64& rng, double margin = 0.02) {
  std::uniform_real_distribution<double> ux(d.x0 + margin, d.x1 - margin), uy(d.y0 + margin, d.y1 - margin);
  const double a = ux(rng);
  return {a, uy(rng)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("plapdg_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("manufactured solutions: point values and boundary traces") {
  const ScalarField u1 = manufactured_solution(1), u2 = manufactured_solution(2);
  CHECK(u1.value({0.5, 0.5}) == doctest::Approx(0.0625).epsilon(1e-15));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 1.0), s(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double a = t(rng);
    CHECK(u1.value({a, 0.0}) == 0.0);
    CHECK(u1.value({a, 1.0}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-16));
    CHECK(u1.value({0.0, a}) == 0.0);
    CHECK(u1.value({1.0, a}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-16));
    const double b = s(rng);
    CHECK(u2.value({1.0, b}) == 0.0);
    CHECK(u2.value({-1.0, b}) == 0.0);
    CHECK(u2.value({b, 1.0}) == 0.0);
    CHECK(u2.value({b, -1.0}) == 0.0);
  }
  CHECK(u1.zero_on_boundary());
  CHECK(u2.domain().x0 == -1.0);
  CHECK_THROWS_AS(manufactured_solution(3), std::invalid_argument);
}

TEST_CASE("dual-number derivatives match central differences") {
  for (int ex : {1, 2}) {
    const ScalarField u = manufactured_solution(ex);
    std::mt19937_64 rng(10 + ex);
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
      const Vec2 x = random_point(u.domain(), rng);
      const Jet j = u(x);
      for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = h;
        const double dk = (u.value(x + e) - u.value(x - e)) / (2 * h);
        CHECK(j.grad[k] == doctest::Approx(dk).epsilon(1e-6).scale(1.0));
        const Vec2 hk = (u(x + e).grad - u(x - e).grad) / (2 * h);
        CHECK((j.hessian.col(k) - hk).norm() <= 1e-6 * std::max(1.0, hk.norm()));
      }
      const Vec2 g = ex == 1 ? grad_example1(x) : grad_example2(x);
      CHECK((j.grad - g).norm() <= 1e-12 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("forcing examples") {
  const ScalarField u = manufactured_solution(1);
  CHECK(forcing(u, 4.0, {0.0, 0.0}) == 0.0);
  const Vec2 x{0.3, 0.7};
  const Jet j = u(x);
  CHECK(forcing(u, 2.0, x) == doctest::Approx(-j.hessian.trace()).epsilon(1e-14));
  CHECK_THROWS_AS(forcing(u, 1.5, x), std::invalid_argument);
  CHECK(forcing_fn(u, 4.0)(x) == forcing(u, 4.0, x));
}

TEST_CASE("forcing agrees with the flux divergence by finite differences") {
  for (int ex : {1, 2}) {
    const ScalarField u = manufactured_solution(ex);
    auto* grad = ex == 1 ? &grad_example1 : &grad_example2;
    const double h = ex == 1 ? 1e-3 : 2e-4;  // example 2 has a layer of width 1/50
    for (double p : {2.5, 4.0, 4.5}) {
      std::mt19937_64 rng(100 * ex + static_cast<int>(2 * p));
      int tested = 0;
      while (tested < 100) {
        const Vec2 x = random_point(u.domain(), rng);
        if (u(x).grad.norm() < 1e-3) continue;
        ++tested;
        const double f = forcing(u, p, x), fd = flux_divergence(grad, p, x, h);
        INFO("example " << ex << ", p = " << p << ", x = (" << x.x() << ", " << x.y() << ")");
        CHECK(std::abs(f - fd) <= 1e-5 * std::max(std::abs(f), 1e-3));
      }
    }
  }
}

TEST_CASE("fit_slope examples") {
  const SlopeFit a = fit_slope({{1, 10}, {2, 20}}, FitScale::LogLog);
  CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<std::pair<double, double>> pw;
  for (double h : {0.2, 0.1, 0.05, 0.025}) pw.emplace_back(h, 3.7 * h * h);
  CHECK(std::abs(fit_slope(pw, FitScale::LogLog).slope - 2.0) <= 1e-12);

  std::vector<std::pair<double, double>> ex;
  for (int r = 1; r <= 5; ++r) ex.emplace_back(r, 0.4 * std::exp(-r));
  const SlopeFit e = fit_slope(ex, FitScale::SemiLogY);
  CHECK(e.slope == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(std::exp(e.intercept) == doctest::Approx(0.4).epsilon(1e-12));

  CHECK_THROWS_AS(fit_slope({{1, 1}}, FitScale::LogLog), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{1, 1}, {1, 2}}, FitScale::LogLog), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{1, 1}, {2, -1}}, FitScale::SemiLogY), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{0, 1}, {2, 1}}, FitScale::LogLog), std::invalid_argument);
  CHECK(fit_slope({{0, 1}, {2, 1}}, FitScale::SemiLogY).slope == 0.0);

  // R^2 of noisy data lies in (0, 1)
  const SlopeFit n = fit_slope({{1, 1.0}, {2, 0.5}, {3, 0.4}, {4, 0.1}}, FitScale::SemiLogY);
  CHECK(n.r_squared > 0.0);
  CHECK(n.r_squared < 1.0);
}

TEST_CASE("study configs: JSON and TOML") {
  const StudyConfig base = default_study(StudyKind::H);
  const StudyConfig j = study_config_from_json_text(
      R"({"study": "p", "example": 2, "p": ["5/2", 4, 4.5], "r": [1, 3], "h0": 0.25,
          "penalty_mode": "theoretical", "theta": 0, "solver": {"continuation_step": "1/4"}, "timings": true})",
      base);
  CHECK(j.kind == StudyKind::P);
  CHECK(j.example == 2);
  REQUIRE(j.p_values.size() == 3);
  CHECK(j.p_values[0].str() == "5/2");
  CHECK(j.p_values[1].str() == "4");
  CHECK(j.p_values[2].str() == "9/2");
  CHECK(j.r_values == std::vector<int>{1, 3});
  CHECK(j.h0 == 0.25);
  CHECK(j.penalty.mode == PenaltyMode::Theoretical);
  CHECK(j.penalty.theta == 0.0);
  CHECK(j.solver.continuation_step.den == 4);
  CHECK(j.timings);

  const StudyConfig t = study_config_from_toml_text(R"(
study = "h"
p = ["2", "4"]
r = [2]
levels = [1, 2]   # comment
penalty_scale = 20.0

[solver]
newton_tol = 1e-9
)",
                                                    base);
  CHECK(t.kind == StudyKind::H);
  CHECK(t.p_values[0].linear());
  CHECK(t.levels == std::vector<int>{1, 2});
  CHECK(t.penalty.scale == 20.0);
  CHECK(t.solver.newton_tol == 1e-9);
  CHECK(t.solver.max_newton_iters == base.solver.max_newton_iters);

  // the JSON echo reads back to the same config
  const StudyConfig back = study_config_from_json_text(config_to_json(j), base);
  CHECK(config_to_json(back) == config_to_json(j));

  CHECK_THROWS_AS(study_config_from_json_text(R"({"levles": [0]})", base), std::invalid_argument);
  CHECK_THROWS_AS(study_config_from_json_text(R"({"r": [0]})", base), std::invalid_argument);
  CHECK_THROWS_AS(study_config_from_json_text(R"({"p": ["3/2"]})", base), std::invalid_argument);
  CHECK_THROWS_AS(study_config_from_json_text(R"({"theta": 0.5})", base), std::invalid_argument);
  CHECK_THROWS_AS(study_config_from_json_text("{", base), std::invalid_argument);
  CHECK_THROWS_AS(study_config_from_toml_text("p = [", base), std::invalid_argument);
}

TEST_CASE("emit_report: empty and one-row reports") {
  ConvergenceReport empty{default_study(StudyKind::H), {}, {}};
  const auto d0 = scratch_dir("empty");
  const auto files = emit_report(empty, d0);
  CHECK(files.size() == 3);
  CHECK(slurp(d0 / "errors.csv") == "example,p,r,h_or_r,quasi_norm_error,broken_norm_error,newton_iters,wall_ms\n");
  CHECK(count_lines(slurp(d0 / "slopes.csv")) == 1);
  CHECK(std::filesystem::exists(d0 / "config.json"));
  for (const auto& e : std::filesystem::directory_iterator(d0)) CHECK(e.path().extension() != ".svg");

  ConvergenceReport one{default_study(StudyKind::H), {}, {}};
  ConvergenceCell c;
  c.p = parse_exponent("4");
  c.r = 1;
  c.h = 0.2;
  c.quasi_norm_error = 0.01;
  c.broken_norm_error = 0.02;
  c.newton_iters = 7;
  c.converged = true;
  one.cells.push_back(c);
  fit_slopes(one);
  CHECK(one.slopes.empty());
  const auto d1 = scratch_dir("one");
  emit_report(one, d1);
  const std::string csv = slurp(d1 / "errors.csv");
  CHECK(count_lines(csv) == 2);
  CHECK(csv.find("1,4,1,0.2,1.000000000000e-02,2.000000000000e-02,7,0.000\n") != std::string::npos);
  const std::string svg = slurp(d1 / "study_h_quasi_norm.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("href") == std::string::npos);  // no external assets
  // one data marker plus its legend swatch, and no fit line
  std::size_t circles = 0;
  for (std::size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
  CHECK(circles == 2);
  CHECK(svg.find("stroke-dasharray") == std::string::npos);
}

TEST_CASE("linear mode reproduces SIPG rates and the pipeline is deterministic") {
  setenv("PLAPDG_THREADS", "1", 1);
  StudyConfig c = default_study(StudyKind::H);
  c.p_values = {parse_exponent("2", true)};
  c.r_values = {1, 2};
  c.levels = {1, 2, 3};
  const ConvergenceReport a = run_h_study(c);
  REQUIRE(a.all_converged());
  for (int r : {1, 2}) {
    const auto s = a.slope(c.p_values[0], r, ErrorKind::BrokenNorm);
    REQUIRE(s);
    INFO("r = " << r);
    CHECK(s->fit.slope == doctest::Approx(r).epsilon(0.2 / r));
    CHECK(s->points == 3);
  }
  for (const ConvergenceCell& cell : a.cells) {
    CHECK(cell.newton_iters == 1);
    // at p = 2 the two error measures coincide
    CHECK(cell.quasi_norm_error == doctest::Approx(cell.broken_norm_error).epsilon(1e-10));
  }

  const auto d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
  emit_report(a, d1);
  emit_report(run_h_study(c), d2);
  unsetenv("PLAPDG_THREADS");
  CHECK(slurp(d1 / "errors.csv") == slurp(d2 / "errors.csv"));
  CHECK(slurp(d1 / "slopes.csv") == slurp(d2 / "slopes.csv"));
  CHECK(slurp(d1 / "study_h_broken_norm.svg") == slurp(d2 / "study_h_broken_norm.svg"));
}

TEST_CASE("p = 4 h-study on coarse levels") {
  StudyConfig c = default_study(StudyKind::H);
  c.p_values = {parse_exponent("4")};
  c.r_values = {1};
  c.levels = {0, 1, 2};
  const ConvergenceReport rep = run_h_study(c);
  REQUIRE(rep.all_converged());
  for (const ConvergenceCell& cell : rep.cells) {
    CHECK(cell.quasi_norm_error > 0.0);
    // broken^p <= quasi^2, end to end
    CHECK(std::pow(cell.broken_norm_error, 4.0) <= cell.quasi_norm_error * cell.quasi_norm_error * (1 + 1e-10));
  }
  for (std::size_t i = 1; i < rep.cells.size(); ++i) {
    CHECK(rep.cells[i].quasi_norm_error < rep.cells[i - 1].quasi_norm_error);
  }
  const auto s = rep.slope(c.p_values[0], 1, ErrorKind::QuasiNorm);
  REQUIRE(s);
  CHECK(s->fit.slope > 0.75);
}

TEST_CASE("p-study errors decay in the degree") {
  StudyConfig c = default_study(StudyKind::P);
  c.p_values = {parse_exponent("4")};
  c.r_values = {1, 2, 3};
  const ConvergenceReport rep = run_p_study(c);
  REQUIRE(rep.all_converged());
  REQUIRE(rep.cells.size() == 3);
  for (std::size_t i = 1; i < rep.cells.size(); ++i) {
    CHECK(rep.cells[i].quasi_norm_error < rep.cells[i - 1].quasi_norm_error);
    CHECK(rep.cells[i].broken_norm_error < rep.cells[i - 1].broken_norm_error);
    CHECK(rep.cells[i].level == 0);
  }
  const auto s = rep.slope(c.p_values[0], 0, ErrorKind::QuasiNorm);
  REQUIRE(s);
  CHECK(s->scale == FitScale::SemiLogY);
  CHECK(s->fit.slope < 0.0);
  CHECK(errors_csv(rep).find("\n1,4,3,3,") != std::string::npos);
}

TEST_CASE("a failing cell is recorded, not thrown") {
  StudyConfig c = default_study(StudyKind::P);
  c.p_values = {parse_exponent("4")};
  c.r_values = {1};
  c.solver.max_newton_iters = 1;
  const ConvergenceReport rep = run_p_study(c);
  REQUIRE(rep.cells.size() == 1);
  CHECK_FALSE(rep.all_converged());
  CHECK(rep.cells[0].failure.find("q = ") != std::string::npos);
  CHECK(errors_csv(rep).find("nan,nan") != std::string::npos);
}
