// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "plapdg/exponent.hpp"
#include "plapdg/penalty.hpp"

using namespace plapdg;

namespace {

std::shared_ptr<const TriMesh> unit_square(double h) {
  return std::make_shared<const TriMesh>(build_structured_mesh(Rect{}, h));
}

// Evaluates the four candidate terms of the epsilon rule term by term,
// with p' and the combined constant written out from scratch.
double epsilon_oracle(double p, double theta, double c1, double c2) {
  const double pc = p / (p - 1.0);
  const double ct = std::exp2(p - 1) * c1 + std::exp2(2 * p - 4) * c1 + std::exp2(2 * p - 3) * c1 + 1.0;
  const double a = std::exp2(1 - p) * c2 / (std::exp2(p - 2) * c1 + ct + (std::exp2(p - 1) + 1) * std::abs(theta));
  double best = std::min(a, 0.25);
  best = std::min(best, pc / 4.0 * std::pow(p / 4.0, 1.0 / (p - 1.0)));
  if (theta != 0.0) best = std::min(best, std::exp2(4 - p) / std::abs(theta));
  return best;
}

}  // namespace

TEST_CASE("exponent rationalization") {
  const RationalExponent p4 = rationalize_exponent(4, 1);
  CHECK(p4.k == 1);
  CHECK(p4.l == 1);
  const RationalExponent p52 = rationalize_exponent(5, 2);
  CHECK(p52.k == 1);
  CHECK(p52.l == 4);
  const RationalExponent p92 = rationalize_exponent(9, 2);
  CHECK(p92.k == 5);
  CHECK(p92.l == 4);
  CHECK(std::gcd(p92.k, p92.l) == 1);

  CHECK(parse_exponent("2.5") == p52);
  CHECK(parse_exponent("9/2") == p92);
  CHECK(parse_exponent("4.50") == p92);
  CHECK(parse_exponent("18/4") == p92);

  CHECK_THROWS_AS(rationalize_exponent(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(rationalize_exponent(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(parse_exponent("abc"), std::invalid_argument);
  const RationalExponent lin = rationalize_exponent(2, 1, true);
  CHECK(lin.linear());
  CHECK(lin.value() == 2.0);
}

TEST_CASE("exponent invariants hold exactly in rational arithmetic") {
  for (std::int64_t den = 1; den <= 12; ++den) {
    for (std::int64_t num = 2 * den + 1; num <= 7 * den; ++num) {
      const RationalExponent p = rationalize_exponent(num, den);
      CHECK(std::gcd(p.k, p.l) == 1);
      // 2 + 2k/l == num/den  <=>  (2l + 2k) den == num l
      CHECK((2 * p.l + 2 * p.k) * den == num * p.l);
      // 1/p + 1/p' == 1  <=>  den/num + conj_den/conj_num == 1
      CHECK(den * p.conj_num + p.conj_den * num == num * p.conj_num);
    }
  }
}

TEST_CASE("inverse constant G") {
  const RationalExponent p4 = rationalize_exponent(4, 1);
  CHECK(inverse_constant_G(p4, 1, 1.0, 0.5) == doctest::Approx(512.0).epsilon(1e-14));
  CHECK(inverse_constant_G(p4, 2, 1.0, 0.5) == doctest::Approx(1536.0).epsilon(1e-14));
  for (int r = 1; r <= 5; ++r) {
    const double g = inverse_constant_G(p4, r, 0.3, 0.02);
    CHECK(inverse_constant_G(p4, r, 0.3, 0.01) == doctest::Approx(2.0 * g).epsilon(1e-14));
  }
  // p = 5/2 has k = 1: 2^{9/4} * 4 * 25/4 * 1 * |F|/(2|K|)
  const RationalExponent p52 = rationalize_exponent(5, 2);
  CHECK(inverse_constant_G(p52, 1, 1.0, 0.5) == doctest::Approx(std::pow(2.0, 2.25) * 25.0).epsilon(1e-14));
}

TEST_CASE("epsilon selection") {
  const RationalExponent p4 = rationalize_exponent(4, 1);
  const double eps = select_epsilon(p4, -1.0, 1.0, 1.0);
  CHECK(eps == doctest::Approx(epsilon_oracle(4.0, -1.0, 1.0, 1.0)).epsilon(1e-14));
  CHECK(eps == doctest::Approx(1.0 / 560.0).epsilon(1e-14));

  // theta = 0 drops the 2^{4-p}/|theta| candidate entirely
  CHECK(select_epsilon(p4, 0.0, 1.0, 1.0) == doctest::Approx(epsilon_oracle(4.0, 0.0, 1.0, 1.0)).epsilon(1e-14));

  for (const char* ps : {"2.5", "3", "4", "4.5", "7"}) {
    const RationalExponent p = parse_exponent(ps);
    for (double theta : {-1.0, -0.5, 0.0, 1.0}) {
      for (double c1 : {1e-3, 1.0, 30.0}) {
        for (double c2 : {1e-2, 1.0, 5.0}) {
          const double e = select_epsilon(p, theta, c1, c2);
          CHECK(e > 0.0);
          CHECK(e <= 0.25);
          CHECK(e == doctest::Approx(epsilon_oracle(p.value(), theta, c1, c2)).epsilon(1e-14));
        }
      }
    }
  }
  CHECK(young_mu(0.5) == 1.0);
  CHECK(young_mu(1.0 / 560.0) == doctest::Approx(140.0).epsilon(1e-14));
}

TEST_CASE("sigma on the two-element mesh, theoretical mode") {
  auto mesh = unit_square(std::sqrt(2.0));
  REQUIRE(mesh->num_elements() == 2);
  DgSpace space(mesh, 1);
  PenaltyOptions opt;
  opt.mode = PenaltyMode::Theoretical;
  opt.theta = -1.0;
  opt.c1 = 1.0;
  opt.c2 = 1.0;
  const RationalExponent p4 = rationalize_exponent(4, 1);
  const PenaltyField field = build_penalty(space, p4, opt);

  const double eps = epsilon_oracle(4.0, -1.0, 1.0, 1.0);
  const double mu = std::max(1.0, 1.0 / (4.0 * eps));
  CHECK(field.epsilon == doctest::Approx(eps).epsilon(1e-14));
  CHECK(field.mu == doctest::Approx(mu).epsilon(1e-14));
  for (int f = 0; f < mesh->num_interfaces(); ++f) {
    const Interface& F = mesh->interfaces()[f];
    // 2^{4/2+1} * 4 * 4^2 * 1 * (2*0 + 1) * |F| / (2 * 1/2)
    const double G = 8.0 * 4.0 * 16.0 * F.length;
    const double zeta = eps / (3.0 * mu * G);
    const double expected = F.boundary() ? 1.0 / zeta : 1.0 / (2.0 * zeta);
    CHECK(field[f].sigma == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("weights and sigma invariants") {
  const RationalExponent p = parse_exponent("4.5");
  auto mesh = unit_square(0.4);
  std::vector<int> degrees(mesh->num_elements());
  for (int k = 0; k < mesh->num_elements(); ++k) degrees[k] = 1 + (k * 7) % 5;
  DgSpace mixed(mesh, degrees);

  for (PenaltyMode mode : {PenaltyMode::Practical, PenaltyMode::Theoretical}) {
    PenaltyOptions opt;
    opt.mode = mode;
    opt.c1 = 2.0;
    opt.c2 = 0.5;
    const PenaltyField field = build_penalty(mixed, p, opt);
    for (int f = 0; f < mesh->num_interfaces(); ++f) {
      const Interface& F = mesh->interfaces()[f];
      const InterfacePenalty& s = field[f];
      CHECK(s.w_plus >= 0.0);
      CHECK(s.w_minus >= 0.0);
      CHECK(s.w_plus <= 1.0);
      CHECK(s.w_plus + s.w_minus == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(s.sigma > 0.0);
      if (F.boundary()) {
        CHECK(s.w_plus == 1.0);
        CHECK(s.w_minus == 0.0);
        CHECK(s.sigma * s.zeta_plus == doctest::Approx(1.0).epsilon(1e-14));
      } else {
        CHECK(std::abs(s.sigma * (s.zeta_plus + s.zeta_minus) - 1.0) <= 1e-14);
      }
      if (mode == PenaltyMode::Theoretical) {
        double min_mg = std::numeric_limits<double>::infinity();
        for (int k : {F.plus, F.minus}) {
          min_mg = std::min(min_mg, 3.0 * inverse_constant_G(p, mixed.degree(k), F.length, mesh->area(k)));
        }
        // equality on boundary faces, so allow rounding in the last bits
        CHECK(s.sigma <= field.mu * min_mg / field.epsilon * (1.0 + 1e-14));
      }
    }
  }
}

TEST_CASE("uniform meshes give equal weights") {
  auto mesh = unit_square(0.2);
  DgSpace space(mesh, 2);
  for (PenaltyMode mode : {PenaltyMode::Practical, PenaltyMode::Theoretical}) {
    PenaltyOptions opt;
    opt.mode = mode;
    opt.c1 = 1.0;
    opt.c2 = 1.0;
    const PenaltyField field = build_penalty(space, rationalize_exponent(4, 1), opt);
    for (int f = 0; f < mesh->num_interfaces(); ++f) {
      if (mesh->interfaces()[f].boundary()) continue;
      CHECK(field[f].w_plus == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(field[f].w_minus == doctest::Approx(0.5).epsilon(1e-14));
    }
  }
}

TEST_CASE("unequal degrees shift weight to the lower degree") {
  auto mesh = unit_square(std::sqrt(2.0));
  int interior = -1;
  for (int f = 0; f < mesh->num_interfaces(); ++f) {
    if (!mesh->interfaces()[f].boundary()) interior = f;
  }
  REQUIRE(interior >= 0);
  const Interface& F = mesh->interfaces()[interior];
  std::vector<int> degrees(2);
  degrees[F.plus] = 1;
  degrees[F.minus] = 5;
  DgSpace space(mesh, degrees);
  const RationalExponent p = rationalize_exponent(4, 1);
  PenaltyOptions opt;
  opt.mode = PenaltyMode::Theoretical;
  opt.c1 = opt.c2 = 1.0;
  const PenaltyField field = build_penalty(space, p, opt);
  CHECK(field[interior].w_plus > field[interior].w_minus);
  const double bound =
      field.mu *
      std::min(3.0 * inverse_constant_G(p, 1, F.length, mesh->area(F.plus)),
               3.0 * inverse_constant_G(p, 5, F.length, mesh->area(F.minus))) /
      field.epsilon;
  CHECK(field[interior].sigma <= bound);
}

TEST_CASE("sigma is monotone in the adjacent degrees") {
  auto mesh = unit_square(0.5);
  const RationalExponent p = parse_exponent("2.5");
  for (PenaltyMode mode : {PenaltyMode::Practical, PenaltyMode::Theoretical}) {
    PenaltyOptions opt;
    opt.mode = mode;
    opt.c1 = opt.c2 = 1.0;
    std::vector<int> degrees(mesh->num_elements(), 1);
    PenaltyField prev = build_penalty(DgSpace(mesh, degrees), p, opt);
    for (int step = 0; step < 3 * mesh->num_elements(); ++step) {
      degrees[(step * 5) % mesh->num_elements()] += 1;
      PenaltyField next = build_penalty(DgSpace(mesh, degrees), p, opt);
      for (int f = 0; f < mesh->num_interfaces(); ++f) CHECK(next[f].sigma >= prev[f].sigma * (1.0 - 1e-15));
      prev = std::move(next);
    }
  }
}

TEST_CASE("linear mode has the classical r^2 |F|/|K| shape") {
  const RationalExponent lin = rationalize_exponent(2, 1, true);
  const double g1 = inverse_constant_G(lin, 1, 1.0, 1.0);
  for (int r = 1; r <= 8; ++r) {
    CHECK(inverse_constant_G(lin, r, 1.0, 1.0) / g1 == doctest::Approx(2.0 * (r - 1) * (r - 1) + 1.0));
    CHECK(inverse_constant_G(lin, r, 0.5, 0.25) == doctest::Approx(2.0 * inverse_constant_G(lin, r, 0.5, 0.5)));
  }
  // r^2 growth: the ratio to r^2 settles at 2
  CHECK(inverse_constant_G(lin, 40, 1.0, 1.0) / (g1 * 40 * 40) == doctest::Approx(2.0).epsilon(0.06));

  auto mesh = unit_square(0.25);
  PenaltyOptions opt;
  opt.mode = PenaltyMode::Theoretical;
  const PenaltyField field = build_penalty(DgSpace(mesh, 3), lin, opt);
  CHECK(field.c1 == 1.0);
  CHECK(field.c2 == 1.0);
  for (int f = 0; f < mesh->num_interfaces(); ++f) CHECK(std::isfinite(field[f].sigma));
}

TEST_CASE("practical mode") {
  auto mesh = unit_square(std::sqrt(2.0));
  PenaltyOptions opt;
  opt.scale = 10.0;
  const PenaltyField field = build_penalty(DgSpace(mesh, 2), rationalize_exponent(4, 1), opt);
  for (int f = 0; f < mesh->num_interfaces(); ++f) {
    const Interface& F = mesh->interfaces()[f];
    const double G = 10.0 * 3.0 * F.length / 0.5;
    const double zeta = 1.0 / (3.0 * G);
    CHECK(field[f].sigma == doctest::Approx(F.boundary() ? 1.0 / zeta : 0.5 / zeta).epsilon(1e-14));
  }
  opt.scale = -1.0;
  CHECK_THROWS_AS(build_penalty(DgSpace(mesh, 2), rationalize_exponent(4, 1), opt), std::invalid_argument);
  CHECK(parse_penalty_mode("theoretical") == PenaltyMode::Theoretical);
  CHECK_THROWS_AS(parse_penalty_mode("huge"), std::invalid_argument);
}
