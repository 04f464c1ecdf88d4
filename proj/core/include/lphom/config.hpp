#pragma once

#include <optional>
#include <string>

#include "lphom/geometry.hpp"
#include "lphom/lab.hpp"
#include "lphom/tensor4.hpp"
#include "lphom/transform.hpp"

namespace lphom {

/// Thrown on config validation failures; the message carries the JSON path
/// of the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed and validated run configuration (JSON file, documented schema in
/// the README). Cross-field preconditions (r < rho, resolutions vs eps) are
/// checked at load time.
struct Config {
  DomainBox domain = DomainBox::unit(2);

  double epsilon = 0.0625;
  std::vector<double> schedule;
  double r = 0.5;
  double rho = 0.75;
  std::uint64_t seed = 1;

  // microstructure
  std::string variant = "plywood_lp";  // plywood_lp | plywood_np | perforation
  double a = 0.25;
  std::string gamma_preset = "default_sin";  // default_sin | constant | linear
  double gamma_value = 0.0;
  double rho_min = 0.2, rho_max = 0.4;

  // moduli
  Tensor4 E1 = Tensor4::isotropic(2.0, 1.0);
  Tensor4 E2 = Tensor4::isotropic(1.0, 0.5);

  // grids
  int cell_n = 64;
  Vec3i macro_cells = Vec3i(8, 8, 8);
  int fine_n = 256;
  Vec3i voxels = Vec3i(64, 64, 64);
  int min_pts_per_eps = 8;
  int tensor_samples = 9;

  // study
  std::string study_kind = "homog_error";  // homog_error | lp_np_trend | lemma_suite
  double phase1 = 1.0, phase2 = 4.0;
  long mc_samples = 2'000'000;

  // macro command
  std::string tensor_file;
  Mat3 g_matrix = Mat3::Identity() * 0.1;
  Vec3 load = Vec3(0.0, 0.0, -1.0);

  RotationAngleField gamma_field() const;
  StudySpec study_spec() const;

  static Config from_json_text(const std::string& text);
  static Config from_file(const std::string& path);
  std::string canonical_json() const;
};

}  // namespace lphom
