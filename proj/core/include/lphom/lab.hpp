#pragma once

#include <map>
#include <string>
#include <vector>

#include "lphom/geometry.hpp"
#include "lphom/lts.hpp"
#include "lphom/transform.hpp"

namespace lphom {

/// Configuration of one end-to-end study.
struct StudySpec {
  enum class Kind { lemma_suite, homog_error, lp_np_trend };
  Kind kind = Kind::lemma_suite;

  std::vector<double> schedule;  // eps values, strictly decreasing, >= 3
  double r = 0.5;
  double rho_cutoff = 0.75;

  // microstructure / coefficient parameters
  double a = 0.25;
  double phase1 = 1.0, phase2 = 4.0;  // scalar phases (laminate / perforation studies)
  bool gamma_constant = false;
  double gamma_value = 0.0;  // used when gamma_constant
  RotationAngleField gamma = RotationAngleField::default_sin();

  // resolutions
  int cell_n = 128;
  int fine_n = 256;
  long mc_samples = 2'000'000;
  int min_pts_per_eps = 8;

  std::uint64_t seed = 1;

  void validate() const;
  std::string canonical_json() const;  // for provenance hashing
};

struct StudyRow {
  double epsilon = 0.0;
  double measured = 0.0;
  double reference = 0.0;
  double error = 0.0;
};

struct StudyCase {
  std::string name;
  std::vector<StudyRow> rows;
  double fitted_order = 0.0;
  std::map<std::string, double> metrics;    // extra named scalars
  std::map<std::string, bool> flags;        // pass/fail, re-derivable from rows/metrics
  bool passed() const;
};

struct StudyReport {
  std::string study;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<StudyCase> cases;

  bool all_pass() const;
  std::string to_json() const;
  /// One CSV per case shaped for log-log plotting, keyed by case name.
  std::map<std::string, std::string> plot_csvs() const;
};

/// FNV-1a hash of a canonical config string.
std::string fnv1a_hex(const std::string& text);

/// Operator-lemma verification suite over registered analytic cases
/// (worked example, y-independent control, plywood coefficient, gradients).
StudyReport run_lemma_suite(const StudySpec& spec);

/// Direct-vs-homogenized error decay in the 2D scalar analog, with the
/// corrector-enhanced gradient comparison and the H1 a-priori echo.
StudyReport run_homog_error_study(const StudySpec& spec);

/// Decay of the lp/np symmetric-difference measure for 2/3 < r < 1.
StudyReport run_lp_np_trend(const StudySpec& spec);

}  // namespace lphom
