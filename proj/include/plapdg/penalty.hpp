// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plapdg/dg_space.hpp"
#include "plapdg/exponent.hpp"

namespace plapdg {

enum class PenaltyMode { Theoretical, Practical };

PenaltyMode parse_penalty_mode(std::string_view text);
std::string_view to_string(PenaltyMode mode);

/// Quasi-norm trace inverse constant of element K for the face F:
///   G = 2^{p/2 + 1/k} C_inv,d p^2 k^2 (2(r-1)^2 + 1) |F| / (d |K|),  C_inv,2 = 4.
/// For p = 2 (linear mode) the L^2 trace inverse constant
///   2^{p+1} C_inv,d (2(r-1)^2 + 1) |F| / (d |K|)
/// is used instead.
double inverse_constant_G(const RationalExponent& p, int r, double face_length, double area, int d = 2);

/// Practical replacement: scale (2(r-1)^2 + 1) |F| / |K|.
double practical_constant_G(int r, double face_length, double area, double scale);

/// min{ 2^{1-p} C2 / (2^{p-2} C1 + Ct + (2^{p-1} + 1)|theta|), 2^{4-p}/|theta|,
///      (p'/4)(p/4)^{1/(p-1)}, 1/4 },  Ct = (2^{p-1} + 2^{2p-4} + 2^{2p-3}) C1 + 1.
/// The second term is absent for theta = 0.
double select_epsilon(const RationalExponent& p, double theta, double c1, double c2);

/// max{1, 1/(4 eps)}
double young_mu(double epsilon);

struct PenaltyOptions {
  PenaltyMode mode = PenaltyMode::Practical;
  double scale = 10.0;
  double theta = -1.0;
  /// Constants of the p-structure inequalities; estimated empirically when
  /// unset (theoretical mode only).
  std::optional<double> c1, c2;
};

struct InterfacePenalty {
  double sigma = 0.0;
  double w_plus = 1.0;
  double w_minus = 0.0;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;  // 0 on boundary interfaces
};

struct PenaltyField {
  std::vector<InterfacePenalty> faces;
  PenaltyMode mode = PenaltyMode::Practical;
  RationalExponent p;
  double theta = -1.0;
  /// Theoretical mode: the selected epsilon and mu_eps. Practical mode
  /// fixes the ratio eps/mu_eps to 1 and stores eps = mu = 1.
  double epsilon = 1.0;
  double mu = 1.0;
  double c1 = 1.0, c2 = 1.0;

  const InterfacePenalty& operator[](int f) const { return faces[f]; }
};

/// zeta^{+-} = eps / (m_K mu_eps G_{K+-,F}),  w^{+-} = zeta^{+-}/(zeta^+ + zeta^-),
/// sigma = 1/(zeta^+ + zeta^-); boundary faces take w = (1, 0), sigma = 1/zeta^+.
PenaltyField build_penalty(const DgSpace& space, const RationalExponent& p, const PenaltyOptions& options);

}  // namespace plapdg
