// SPDX-License-Identifier: Apache-2.0
#include "plapdg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "plapdg/verify.hpp"

namespace plapdg {

namespace {

constexpr int kFacesPerElement = 3;  // m_K on conforming triangulations

double inverse_constant_cinv(int d) { return d == 1 ? 1.0 : d == 2 ? 4.0 : 8.0; }

double degree_factor(int r) { return 2.0 * (r - 1) * (r - 1) + 1.0; }

}  // namespace

PenaltyMode parse_penalty_mode(std::string_view text) {
  if (text == "theoretical") return PenaltyMode::Theoretical;
  if (text == "practical") return PenaltyMode::Practical;
  throw std::invalid_argument("unknown penalty mode '" + std::string(text) + "'");
}

std::string_view to_string(PenaltyMode mode) {
  return mode == PenaltyMode::Theoretical ? "theoretical" : "practical";
}

double inverse_constant_G(const RationalExponent& p, int r, double face_length, double area, int d) {
  const double geom = degree_factor(r) * face_length / (d * area);
  const double pv = p.value();
  if (p.linear()) return std::pow(2.0, pv + 1.0) * inverse_constant_cinv(d) * geom;
  const double k = static_cast<double>(p.k);
  return std::pow(2.0, pv / 2.0 + 1.0 / k) * inverse_constant_cinv(d) * pv * pv * k * k * geom;
}

double practical_constant_G(int r, double face_length, double area, double scale) {
  return scale * degree_factor(r) * face_length / area;
}

double select_epsilon(const RationalExponent& p, double theta, double c1, double c2) {
  const double pv = p.value();
  const double pc = p.conj();
  const double at = std::abs(theta);
  const double ct = (std::pow(2.0, pv - 1.0) + std::pow(2.0, 2.0 * pv - 4.0) + std::pow(2.0, 2.0 * pv - 3.0)) * c1 + 1.0;
  const double t1 = std::pow(2.0, 1.0 - pv) * c2 / (std::pow(2.0, pv - 2.0) * c1 + ct + (std::pow(2.0, pv - 1.0) + 1.0) * at);
  const double t2 = at > 0.0 ? std::pow(2.0, 4.0 - pv) / at : std::numeric_limits<double>::infinity();
  const double t3 = pc / 4.0 * std::pow(pv / 4.0, 1.0 / (pv - 1.0));
  return std::min({t1, t2, t3, 0.25});
}

double young_mu(double epsilon) { return std::max(1.0, 1.0 / (4.0 * epsilon)); }

PenaltyField build_penalty(const DgSpace& space, const RationalExponent& p, const PenaltyOptions& options) {
  if (options.theta < -1.0 || options.theta > 1.0) throw std::invalid_argument("theta must lie in [-1, 1]");
  if (options.mode == PenaltyMode::Practical && !(options.scale > 0.0)) {
    throw std::invalid_argument("penalty scale must be positive");
  }
  PenaltyField field;
  field.mode = options.mode;
  field.p = p;
  field.theta = options.theta;

  if (options.mode == PenaltyMode::Theoretical) {
    if (p.linear()) {
      // Both p-structure inequalities are identities at p = 2.
      field.c1 = options.c1.value_or(1.0);
      field.c2 = options.c2.value_or(1.0);
    } else if (options.c1 && options.c2) {
      field.c1 = *options.c1;
      field.c2 = *options.c2;
    } else {
      const auto est = verify::cached_lemma21_constants(p);
      field.c1 = options.c1.value_or(est.c1);
      field.c2 = options.c2.value_or(est.c2);
    }
    field.epsilon = select_epsilon(p, options.theta, field.c1, field.c2);
    field.mu = young_mu(field.epsilon);
  }

  const TriMesh& mesh = space.mesh();
  auto zeta = [&](int k, double len) {
    const double area = mesh.area(k);
    const int r = space.degree(k);
    if (options.mode == PenaltyMode::Practical) {
      return 1.0 / (kFacesPerElement * practical_constant_G(r, len, area, options.scale));
    }
    return field.epsilon / (kFacesPerElement * field.mu * inverse_constant_G(p, r, len, area));
  };

  field.faces.resize(mesh.num_interfaces());
  for (int f = 0; f < mesh.num_interfaces(); ++f) {
    const Interface& F = mesh.interfaces()[f];
    InterfacePenalty& out = field.faces[f];
    out.zeta_plus = zeta(F.plus, F.length);
    if (F.boundary()) {
      out.zeta_minus = 0.0;
      out.w_plus = 1.0;
      out.w_minus = 0.0;
      out.sigma = 1.0 / out.zeta_plus;
    } else {
      out.zeta_minus = zeta(F.minus, F.length);
      const double sum = out.zeta_plus + out.zeta_minus;
      out.w_plus = out.zeta_plus / sum;
      out.w_minus = out.zeta_minus / sum;
      out.sigma = 1.0 / sum;
    }
  }
  return field;
}

}  // namespace plapdg
