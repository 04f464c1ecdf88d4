#include "lphom/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lphom {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double get_number(const json& j, const std::string& path, const char* key, double fallback,
                  bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(path + "/" + key, "missing required field");
    return fallback;
  }
  if (!j.at(key).is_number()) fail(path + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

Tensor4 parse_moduli(const json& j, const std::string& path) {
  if (j.contains("voigt")) {
    const json& v = j.at("voigt");
    if (!v.is_array() || v.size() != 6) fail(path + "/voigt", "expected a 6x6 matrix");
    Mat6 C;
    for (int i = 0; i < 6; ++i) {
      if (!v.at(i).is_array() || v.at(i).size() != 6) fail(path + "/voigt", "expected a 6x6 matrix");
      for (int k = 0; k < 6; ++k) C(i, k) = v.at(i).at(k).get<double>();
    }
    Tensor4 t = Tensor4::from_voigt(C);
    try {
      t.validate(path.c_str());
    } catch (const InvalidArgument& e) {
      fail(path, e.what());
    }
    return t;
  }
  double lambda = get_number(j, path, "lambda", 0.0, true);
  double mu = get_number(j, path, "mu", 0.0, true);
  if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
    fail(path, "isotropic moduli must be positive definite (mu > 0, 3 lambda + 2 mu > 0)");
  return Tensor4::isotropic(lambda, mu);
}

}  // namespace

RotationAngleField Config::gamma_field() const {
  if (gamma_preset == "constant") return RotationAngleField::constant(gamma_value);
  if (gamma_preset == "linear") return RotationAngleField::linear();
  return RotationAngleField::default_sin();
}

StudySpec Config::study_spec() const {
  StudySpec s;
  if (study_kind == "lemma_suite")
    s.kind = StudySpec::Kind::lemma_suite;
  else if (study_kind == "lp_np_trend")
    s.kind = StudySpec::Kind::lp_np_trend;
  else
    s.kind = StudySpec::Kind::homog_error;
  s.schedule = schedule;
  s.r = r;
  s.rho_cutoff = rho;
  s.a = a;
  s.phase1 = phase1;
  s.phase2 = phase2;
  s.gamma_constant = gamma_preset == "constant";
  s.gamma_value = gamma_value;
  s.gamma = gamma_field();
  s.cell_n = cell_n;
  s.fine_n = fine_n;
  s.mc_samples = mc_samples;
  s.min_pts_per_eps = min_pts_per_eps;
  s.seed = seed;
  return s;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Config Config::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config c;

  if (j.contains("domain")) {
    const json& jd = j.at("domain");
    int dim = jd.contains("dim") ? jd.at("dim").get<int>() : 2;
    if (dim < 1 || dim > 3) fail("/domain/dim", "dimension must be 1, 2 or 3");
    Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
    for (int a = 0; a < dim; ++a) {
      lo[a] = jd.contains("lower") ? jd.at("lower").at(a).get<double>() : 0.0;
      hi[a] = jd.contains("upper") ? jd.at("upper").at(a).get<double>() : 1.0;
      if (!(hi[a] > lo[a])) fail("/domain", "upper must exceed lower on every axis");
    }
    c.domain = DomainBox(dim, lo, hi);
  }

  c.epsilon = get_number(j, "", "epsilon", c.epsilon);
  if (!(c.epsilon > 0.0) || !(c.epsilon <= 1.0)) fail("/epsilon", "must lie in (0, 1]");
  c.r = get_number(j, "", "r", c.r);
  if (!(c.r > 0.0) || !(c.r < 1.0)) fail("/r", "must lie in (0, 1)");
  c.rho = get_number(j, "", "rho", c.rho);
  if (!(c.rho > c.r) || !(c.rho < 1.0)) fail("/rho", "must lie in (r, 1)");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("schedule")) {
    if (!j.at("schedule").is_array()) fail("/schedule", "expected an array");
    c.schedule.clear();
    for (const auto& v : j.at("schedule")) c.schedule.push_back(v.get<double>());
    for (std::size_t i = 0; i < c.schedule.size(); ++i) {
      if (!(c.schedule[i] > 0.0)) fail("/schedule", "entries must be positive");
      if (i > 0 && !(c.schedule[i] < c.schedule[i - 1]))
        fail("/schedule", "must be strictly decreasing");
    }
  }

  if (j.contains("microstructure")) {
    const json& jm = j.at("microstructure");
    if (jm.contains("variant")) c.variant = jm.at("variant").get<std::string>();
    if (c.variant != "plywood_lp" && c.variant != "plywood_np" && c.variant != "perforation")
      fail("/microstructure/variant", "expected plywood_lp, plywood_np or perforation");
    c.a = get_number(jm, "/microstructure", "a", c.a);
    if (!(c.a >= 0.0) || !(c.a < 0.5)) fail("/microstructure/a", "must lie in [0, 1/2)");
    if (jm.contains("gamma")) {
      const json& jg = jm.at("gamma");
      if (jg.contains("preset")) c.gamma_preset = jg.at("preset").get<std::string>();
      if (c.gamma_preset != "default_sin" && c.gamma_preset != "constant" &&
          c.gamma_preset != "linear")
        fail("/microstructure/gamma/preset", "expected default_sin, constant or linear");
      c.gamma_value = get_number(jg, "/microstructure/gamma", "value", c.gamma_value);
      if (c.gamma_preset == "constant" && (c.gamma_value < 0.0 || c.gamma_value > M_PI))
        fail("/microstructure/gamma/value", "rotation angle must lie in [0, pi]");
    }
    if (jm.contains("rho_field")) {
      const json& jr = jm.at("rho_field");
      c.rho_min = get_number(jr, "/microstructure/rho_field", "min", c.rho_min);
      c.rho_max = get_number(jr, "/microstructure/rho_field", "max", c.rho_max);
      if (!(c.rho_min > 0.0) || !(c.rho_max < 1.0) || !(c.rho_min <= c.rho_max))
        fail("/microstructure/rho_field", "need 0 < min <= max < 1");
    }
  }

  if (j.contains("moduli")) {
    const json& jm = j.at("moduli");
    if (jm.contains("E1")) c.E1 = parse_moduli(jm.at("E1"), "/moduli/E1");
    if (jm.contains("E2")) c.E2 = parse_moduli(jm.at("E2"), "/moduli/E2");
  }

  if (j.contains("grids")) {
    const json& jg = j.at("grids");
    c.cell_n = static_cast<int>(get_number(jg, "/grids", "cell_n", c.cell_n));
    if (c.cell_n < 2) fail("/grids/cell_n", "must be at least 2");
    c.fine_n = static_cast<int>(get_number(jg, "/grids", "fine_n", c.fine_n));
    c.min_pts_per_eps = static_cast<int>(get_number(jg, "/grids", "min_pts_per_eps", c.min_pts_per_eps));
    if (c.min_pts_per_eps < 8)
      fail("/grids/min_pts_per_eps", "grids must resolve eps (need at least 8)");
    c.tensor_samples = static_cast<int>(get_number(jg, "/grids", "tensor_samples", c.tensor_samples));
    if (c.tensor_samples < 1) fail("/grids/tensor_samples", "need at least one sample");
    if (jg.contains("macro_cells"))
      for (int a = 0; a < 3; ++a) c.macro_cells[a] = jg.at("macro_cells").at(a).get<int>();
    if (jg.contains("voxels"))
      for (int a = 0; a < 3; ++a) c.voxels[a] = jg.at("voxels").at(a).get<int>();
  }

  if (j.contains("study")) {
    const json& js = j.at("study");
    if (js.contains("kind")) c.study_kind = js.at("kind").get<std::string>();
    if (c.study_kind != "homog_error" && c.study_kind != "lp_np_trend" &&
        c.study_kind != "lemma_suite")
      fail("/study/kind", "expected homog_error, lp_np_trend or lemma_suite");
    c.phase1 = get_number(js, "/study", "phase1", c.phase1);
    c.phase2 = get_number(js, "/study", "phase2", c.phase2);
    if (!(c.phase1 > 0.0) || !(c.phase2 > 0.0)) fail("/study", "phases must be positive");
    if (js.contains("mc_samples")) c.mc_samples = js.at("mc_samples").get<long>();
    if (c.mc_samples < 1000) fail("/study/mc_samples", "need at least 1000 samples");
    if (c.study_kind == "lp_np_trend" && !(c.r > 2.0 / 3.0))
      fail("/r", "lp_np_trend requires 2/3 < r < 1");
  }

  if (j.contains("macro")) {
    const json& jm = j.at("macro");
    if (jm.contains("tensor_file")) c.tensor_file = jm.at("tensor_file").get<std::string>();
    if (jm.contains("g_matrix"))
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) c.g_matrix(i, k) = jm.at("g_matrix").at(i).at(k).get<double>();
    if (jm.contains("load"))
      for (int i = 0; i < 3; ++i) c.load[i] = jm.at("load").at(i).get<double>();
  }

  // cross-field: covering feasibility for commands that build one
  double side = std::pow(c.epsilon, c.r);
  for (int a = 0; a < c.domain.dim; ++a)
    if (!(side < c.domain.side(a)))
      fail("/epsilon", "eps^r must be smaller than every domain side");

  return c;
}

std::string Config::canonical_json() const {
  json j;
  j["domain"] = {{"dim", domain.dim},
                 {"lower", {domain.lower[0], domain.lower[1], domain.lower[2]}},
                 {"upper", {domain.upper[0], domain.upper[1], domain.upper[2]}}};
  j["epsilon"] = epsilon;
  j["schedule"] = schedule;
  j["r"] = r;
  j["rho"] = rho;
  j["seed"] = seed;
  j["variant"] = variant;
  j["a"] = a;
  j["gamma_preset"] = gamma_preset;
  j["gamma_value"] = gamma_value;
  j["rho_min"] = rho_min;
  j["rho_max"] = rho_max;
  j["cell_n"] = cell_n;
  j["fine_n"] = fine_n;
  j["min_pts_per_eps"] = min_pts_per_eps;
  j["tensor_samples"] = tensor_samples;
  j["macro_cells"] = {macro_cells[0], macro_cells[1], macro_cells[2]};
  j["voxels"] = {voxels[0], voxels[1], voxels[2]};
  j["study_kind"] = study_kind;
  j["phase1"] = phase1;
  j["phase2"] = phase2;
  j["mc_samples"] = mc_samples;
  j["tensor_file"] = tensor_file;
  return j.dump();
}

}  // namespace lphom
