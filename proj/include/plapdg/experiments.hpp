// SPDX-License-Identifier: Apache-2.0
// Convergence studies against manufactured solutions and their reports.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plapdg/manufactured.hpp"
#include "plapdg/penalty.hpp"
#include "plapdg/solver.hpp"

namespace plapdg {

enum class StudyKind { H, P };

std::string_view to_string(StudyKind kind);

struct StudyConfig {
  StudyKind kind = StudyKind::H;
  int example = 1;
  std::vector<RationalExponent> p_values;  // p = 2 runs a single linear solve
  std::vector<int> r_values;
  std::vector<int> levels{0, 1, 2, 3};  // h-study: h = h0 / 2^j by uniform refinement
  double h0 = 0.2;
  PenaltyOptions penalty;
  SolveOptions solver;
  int quadrature_multiplier = 1;
  std::uint64_t seed = 0;  // echoed only; the studies draw no random numbers
  bool timings = false;    // wall_ms stays 0 otherwise, keeping the CSVs byte-stable

  /// Throws std::invalid_argument on empty grids or out-of-range entries.
  void validate() const;
};

/// Defaults for the h- and p-studies of the given example.
StudyConfig default_study(StudyKind kind, int example = 1);

/// Reads a JSON or TOML file (by extension: .json, .toml). Keys are those
/// of config_to_json; absent keys keep the defaults of `base`.
StudyConfig load_study_config(const std::filesystem::path& path, const StudyConfig& base);
StudyConfig study_config_from_json_text(const std::string& text, const StudyConfig& base);
StudyConfig study_config_from_toml_text(const std::string& text, const StudyConfig& base);
std::string config_to_json(const StudyConfig& config);

struct ConvergenceCell {
  int example = 1;
  RationalExponent p;
  int r = 1;
  int level = 0;  // h-study refinement level; 0 in a p-study
  double h = 0.0;
  int num_dofs = 0;
  double quasi_norm_error = 0.0;   // weight u_h
  double broken_norm_error = 0.0;  // exponent p
  int newton_iters = 0;            // summed over continuation stages
  double wall_ms = 0.0;
  bool converged = false;
  std::string failure;
};

enum class ErrorKind { QuasiNorm, BrokenNorm };
enum class FitScale { LogLog, SemiLogY };

std::string_view to_string(ErrorKind kind);
std::string_view to_string(FitScale scale);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Ordinary least squares on (log x, log y) or (x, log y). Needs two
/// points, y > 0 and, for LogLog, x > 0; throws std::invalid_argument
/// otherwise or when all x coincide. R^2 is 1 when y is constant.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points, FitScale scale);

struct StudySlope {
  RationalExponent p;
  int r = 0;  // fixed degree of an h-study series; 0 for a p-study series
  ErrorKind error = ErrorKind::QuasiNorm;
  FitScale scale = FitScale::LogLog;
  int points = 0;
  SlopeFit fit;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<ConvergenceCell> cells;  // sorted by (p, r, level)
  std::vector<StudySlope> slopes;      // series with at least two converged cells

  bool all_converged() const;
  /// Fitted series for (p, r, error); r is ignored in a p-study.
  std::optional<StudySlope> slope(const RationalExponent& p, int r, ErrorKind error) const;
};

/// Solves one configuration on the given mesh and measures the errors.
/// Solver failures are recorded in the cell, not thrown.
ConvergenceCell run_cell(const StudyConfig& config, const RationalExponent& p, int r,
                         std::shared_ptr<const TriMesh> mesh);

/// For each (p, r, level): h = h0 / 2^level on nested meshes.
ConvergenceReport run_h_study(const StudyConfig& config);
/// For each (p, r) on the single mesh with h = h0.
ConvergenceReport run_p_study(const StudyConfig& config);
ConvergenceReport run_study(const StudyConfig& config);

/// Fills report.slopes from report.cells: log-log in h for an h-study,
/// semi-log in r for a p-study.
void fit_slopes(ConvergenceReport& report);

/// Writes errors.csv, slopes.csv, config.json and one SVG per error kind
/// (omitted when there are no cells). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ConvergenceReport& report, const std::filesystem::path& out_dir);

std::string errors_csv(const ConvergenceReport& report);
std::string slopes_csv(const ConvergenceReport& report);
std::string report_svg(const ConvergenceReport& report, ErrorKind error);

}  // namespace plapdg
