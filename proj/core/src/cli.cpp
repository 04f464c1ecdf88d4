#include "lphom/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lphom/cell.hpp"
#include "lphom/covering.hpp"
#include "lphom/log.hpp"
#include "lphom/macro.hpp"
#include "lphom/microstructure.hpp"
#include "lphom/parallel.hpp"

namespace lphom {

namespace {

namespace fs = std::filesystem;

Config effective_config(const Config& config, const CliOptions& options) {
  Config c = config;
  if (options.seed) c.seed = *options.seed;
  if (options.threads > 0) set_max_threads(options.threads);
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open output file: " + path);
  out << text;
}

bool plan_only(const CliOptions& options, const char* command, std::initializer_list<std::string> outputs) {
  if (!options.dry_run) return false;
  std::printf("[dry-run] %s would write:\n", command);
  for (const std::string& o : outputs) std::printf("  %s/%s\n", options.out_dir.c_str(), o.c_str());
  return true;
}

CoveringOptions covering_options(const Config& c) {
  CoveringOptions copts;
  copts.seed = c.seed;
  if (c.variant == "plywood_lp")
    copts.field = TransformationField::plywood_lp(c.gamma_field());
  else if (c.variant == "plywood_np")
    copts.field = TransformationField::plywood_np(c.gamma_field());
  else
    copts.field = TransformationField::identity();
  return copts;
}

}  // namespace

int cmd_covering(const Config& config, const CliOptions& options) {
  Config c = effective_config(config, options);
  if (plan_only(options, "covering", {"covering.json"})) return 0;
  Covering cov = build_covering(c.domain, c.epsilon, c.r, covering_options(c));
  write_text(options.out_dir + "/covering.json", cov.to_json() + "\n");
  LPHOM_LOG_INFO("covering: N=%ld interior=%ld |K|=%g", cov.N_eps, cov.N_tilde_eps,
                 cov.remainder_measure);
  return 0;
}

int cmd_microstructure(const Config& config, const CliOptions& options) {
  Config c = effective_config(config, options);
  if (plan_only(options, "microstructure", {"voxels.raw", "voxels.json"})) return 0;

  RotationAngleField gamma = c.gamma_field();
  std::function<int(const Vec3&)> chi;
  Covering covering;
  if (c.variant == "plywood_lp") {
    if (c.domain.dim != 3) throw ConfigError("/domain/dim: plywood variants need a 3D domain");
    covering = build_covering(c.domain, c.epsilon, c.r, covering_options(c));
    IndicatorSpec spec = IndicatorSpec::plywood_lp(c.a, gamma);
    chi = [spec, covering, eps = c.epsilon](const Vec3& x) {
      return plywood_indicator_lp(spec, covering, eps, x);
    };
  } else if (c.variant == "plywood_np") {
    if (c.domain.dim != 3) throw ConfigError("/domain/dim: plywood variants need a 3D domain");
    IndicatorSpec spec = IndicatorSpec::plywood_np(c.a, gamma);
    chi = [spec, eps = c.epsilon](const Vec3& x) { return plywood_indicator_np(spec, eps, x); };
  } else {
    covering = build_covering(c.domain, c.epsilon, c.r, covering_options(c));
    double lo = c.rho_min, hi = c.rho_max;
    auto rho = [lo, hi, dom = c.domain](const Vec3& x) {
      double t = (x[0] - dom.lower[0]) / dom.side(0);
      return lo + (hi - lo) * t;
    };
    IndicatorSpec spec = IndicatorSpec::perforation(rho, lo, hi);
    chi = [spec, covering, eps = c.epsilon](const Vec3& x) {
      return perforation_indicator(spec, covering, eps, x);
    };
  }

  nlohmann::ordered_json params;
  params["variant"] = c.variant;
  params["a"] = c.a;
  params["r"] = c.r;
  params["gamma_preset"] = c.gamma_preset;
  params["gamma_value"] = c.gamma_value;
  fs::create_directories(options.out_dir);
  double fraction = write_voxels(options.out_dir + "/voxels", chi, c.domain, c.voxels, c.epsilon,
                                 c.variant, params.dump());
  LPHOM_LOG_INFO("microstructure: voxel fraction %.6f", fraction);
  return 0;
}

int cmd_lts_verify(const Config& config, const CliOptions& options) {
  Config c = effective_config(config, options);
  if (plan_only(options, "lts-verify", {"lemma_suite.json"})) return 0;
  StudySpec spec = c.study_spec();
  spec.kind = StudySpec::Kind::lemma_suite;
  if (spec.schedule.empty()) spec.schedule = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  StudyReport report = run_lemma_suite(spec);
  write_text(options.out_dir + "/lemma_suite.json", report.to_json() + "\n");
  if (options.emit_plot_data)
    for (const auto& [name, csv] : report.plot_csvs())
      write_text(options.out_dir + "/lemma_suite_" + name + ".csv", csv);
  return report.all_pass() ? 0 : 1;
}

int cmd_homogenize(const Config& config, const CliOptions& options) {
  Config c = effective_config(config, options);
  if (plan_only(options, "homogenize", {"tensor.json", "tensor.csv"})) return 0;
  RotationAngleField gamma = c.gamma_field();
  HomogenizedTensorField field;
  if (c.variant == "plywood_np") {
    Vec3 x12 = c.domain.center();
    field = sample_Bhom_field(gamma, c.a, c.E1, c.E2, c.cell_n, x12, c.domain.lower[2],
                              c.domain.upper[2], c.tensor_samples);
  } else {
    field = sample_Ahom_field(gamma, c.a, c.E1, c.E2, c.cell_n, c.domain.lower[2],
                              c.domain.upper[2], c.tensor_samples);
  }
  write_text(options.out_dir + "/tensor.json", field.to_json() + "\n");
  write_text(options.out_dir + "/tensor.csv", field.to_csv());
  // structural acceptance: symmetries are enforced during assembly; check
  // definiteness and the Reuss-Voigt sandwich per sample here
  bool pass = true;
  for (const TensorSample& s : field.samples) {
    if (s.tensor.min_eigenvalue() <= 0.0) pass = false;
    TensorBounds b = voigt_reuss_bounds(M_PI * c.a * c.a, c.E1, c.E2);
    for (const Mat3& xi : probe_basis()) {
      double q = s.tensor.quadratic_form(xi);
      if (q < b.reuss.quadratic_form(xi) - 1e-9 || q > b.voigt.quadratic_form(xi) + 1e-9)
        pass = false;
    }
  }
  return pass ? 0 : 1;
}

int cmd_macro(const Config& config, const CliOptions& options) {
  Config c = effective_config(config, options);
  if (plan_only(options, "macro", {"solution.json", "solution.bin"})) return 0;
  if (c.tensor_file.empty()) throw ConfigError("/macro/tensor_file: required by the macro command");
  std::ifstream in(c.tensor_file);
  if (!in) throw ConfigError("/macro/tensor_file: cannot open " + c.tensor_file);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  HomogenizedTensorField field = HomogenizedTensorField::from_json(text);

  if (c.domain.dim != 3) throw ConfigError("/domain/dim: macro elastic solve needs a 3D domain");
  MacroMesh mesh = MacroMesh::structured(c.domain, c.macro_cells);
  BoundaryData bc;
  Mat3 B = c.g_matrix;
  bc.displacement = [B](const Vec3& x) { return (B * x).eval(); };
  Vec3 load = c.load;
  bc.load = [load](const Vec3&) { return load; };
  MacroSolution sol = solve_macro_elastic(field, bc, mesh);
  fs::create_directories(options.out_dir);
  sol.write_field(options.out_dir + "/solution");
  if (options.emit_plot_data)
    for (int axis = 0; axis < 3; ++axis)
      write_text(options.out_dir + "/solution_axis" + std::to_string(axis) + ".csv",
                 sol.axis_csv(axis));
  LPHOM_LOG_INFO("macro: residual %.3e energy %.6g", sol.residual, sol.energy);
  return sol.residual <= 1e-8 ? 0 : 1;
}

int cmd_converge(const Config& config, const CliOptions& options) {
  Config c = effective_config(config, options);
  if (plan_only(options, "converge", {"study.json"})) return 0;
  StudySpec spec = c.study_spec();
  StudyReport report;
  if (spec.kind == StudySpec::Kind::lp_np_trend) {
    if (spec.schedule.empty()) spec.schedule = {1.0 / 128, 1.0 / 256, 1.0 / 512};
    report = run_lp_np_trend(spec);
  } else if (spec.kind == StudySpec::Kind::lemma_suite) {
    return cmd_lts_verify(config, options);
  } else {
    if (spec.schedule.empty()) spec.schedule = {1.0 / 8, 1.0 / 16, 1.0 / 32};
    report = run_homog_error_study(spec);
  }
  write_text(options.out_dir + "/study.json", report.to_json() + "\n");
  if (options.emit_plot_data)
    for (const auto& [name, csv] : report.plot_csvs())
      write_text(options.out_dir + "/study_" + name + ".csv", csv);
  return report.all_pass() ? 0 : 1;
}

}  // namespace lphom
