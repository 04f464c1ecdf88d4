#include "lphom/lab.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <nlohmann/json.hpp>

#include "lphom/cell.hpp"
#include "lphom/log.hpp"
#include "lphom/macro.hpp"
#include "lphom/microstructure.hpp"
#include "lphom/parallel.hpp"

namespace lphom {

namespace {
using json = nlohmann::ordered_json;

StudyCase make_case(const std::string& name, const ConvergenceRecord& rec) {
  StudyCase c;
  c.name = name;
  for (std::size_t i = 0; i < rec.schedule.size(); ++i)
    c.rows.push_back({rec.schedule[i], rec.measured[i], rec.reference, rec.abs_error[i]});
  c.fitted_order = rec.fitted_order;
  return c;
}

bool rows_strictly_decreasing(const std::vector<StudyRow>& rows, int last_k, double floor_abs) {
  int n = static_cast<int>(rows.size());
  for (int i = std::max(0, n - last_k); i + 1 < n; ++i) {
    bool below = rows[i].error <= floor_abs && rows[i + 1].error <= floor_abs;
    if (!(rows[i].error > rows[i + 1].error) && !below) return false;
  }
  return true;
}

double fitted_slope(const std::vector<StudyRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(rows.size());
  for (const StudyRow& row : rows) {
    double lx = std::log(row.epsilon), ly = std::log(std::max(row.measured, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = n * sxx - sx * sx;
  return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

void StudySpec::validate() const {
  if (schedule.size() < 3) throw InvalidArgument("StudySpec: schedule needs at least 3 entries");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw InvalidArgument("StudySpec: schedule entries must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1]))
      throw InvalidArgument("StudySpec: schedule must be strictly decreasing");
  }
  if (!(r > 0.0) || !(r < 1.0)) throw InvalidArgument("StudySpec: r must lie in (0,1)");
  if (kind == Kind::lp_np_trend && !(r > 2.0 / 3.0))
    throw InvalidArgument("StudySpec: lp/np trend requires 2/3 < r < 1");
  if (min_pts_per_eps < 8)
    throw InvalidArgument("StudySpec: grids must resolve eps (>= 8 points per eps)");
  if (kind == Kind::homog_error) {
    double finest = schedule.back();
    long need = static_cast<long>(std::ceil(8.0 / finest));
    if (fine_n < need)
      throw ResolutionError("StudySpec: fine mesh does not resolve the finest eps", need);
  }
  if (!(phase1 > 0.0) || !(phase2 > 0.0))
    throw InvalidArgument("StudySpec: scalar phases must be positive");
}

std::string StudySpec::canonical_json() const {
  json j;
  j["kind"] = static_cast<int>(kind);
  j["schedule"] = schedule;
  j["r"] = r;
  j["rho_cutoff"] = rho_cutoff;
  j["a"] = a;
  j["phase1"] = phase1;
  j["phase2"] = phase2;
  j["gamma_constant"] = gamma_constant;
  j["gamma_value"] = gamma_value;
  j["cell_n"] = cell_n;
  j["fine_n"] = fine_n;
  j["mc_samples"] = mc_samples;
  j["min_pts_per_eps"] = min_pts_per_eps;
  j["seed"] = seed;
  return j.dump();
}

bool StudyCase::passed() const {
  for (const auto& [name, ok] : flags)
    if (!ok) return false;
  return true;
}

bool StudyReport::all_pass() const {
  for (const StudyCase& c : cases)
    if (!c.passed()) return false;
  return true;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string StudyReport::to_json() const {
  json j;
  j["study"] = study;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  json jc = json::array();
  for (const StudyCase& c : cases) {
    json cc;
    cc["name"] = c.name;
    json rows = json::array();
    for (const StudyRow& rw : c.rows)
      rows.push_back({{"epsilon", rw.epsilon},
                      {"measured", rw.measured},
                      {"reference", rw.reference},
                      {"error", rw.error}});
    cc["rows"] = rows;
    cc["fitted_order"] = c.fitted_order;
    json jm;
    for (const auto& [k, v] : c.metrics) jm[k] = v;
    cc["metrics"] = jm;
    json jf;
    for (const auto& [k, v] : c.flags) jf[k] = v;
    cc["flags"] = jf;
    cc["passed"] = c.passed();
    jc.push_back(cc);
  }
  j["cases"] = jc;
  j["all_pass"] = all_pass();
  return j.dump(2);
}

std::map<std::string, std::string> StudyReport::plot_csvs() const {
  std::map<std::string, std::string> out;
  char buf[256];
  for (const StudyCase& c : cases) {
    std::string csv = "epsilon,measured,reference,abs_error\n";
    for (const StudyRow& rw : c.rows) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", rw.epsilon, rw.measured,
                    rw.reference, rw.error);
      csv += buf;
    }
    out[c.name] = csv;
  }
  return out;
}

// ---------------------------------------------------------------------------
// lemma suite
// ---------------------------------------------------------------------------

StudyReport run_lemma_suite(const StudySpec& spec) {
  spec.validate();
  StudyReport report;
  report.study = "lemma_suite";
  report.seed = spec.seed;
  report.config_hash = fnv1a_hex(spec.canonical_json());

  LtsOptions opt;
  opt.r = spec.r;
  opt.min_pts_per_eps = spec.min_pts_per_eps;
  // 1D measurements are cheap: resolve well past the contract minimum so the
  // quadrature floor sits far below the operator error being observed
  LtsOptions opt1d = opt;
  opt1d.min_pts_per_eps = std::max(opt.min_pts_per_eps, 64);

  // Monotonicity is asserted against a declared noise floor: once errors sit
  // at the harness measurement floor, their ordering is equidistribution
  // noise, not convergence information (the zero-error control case is the
  // extreme example).
  const double kMonoFloorRel = 1e-3;

  auto add_case = [&](const std::string& name, const ConvergenceRecord& rec, double oracle,
                      double final_rel_tol) {
    StudyCase c = make_case(name, rec);
    c.metrics["oracle"] = oracle;
    c.metrics["mono_floor_rel"] = kMonoFloorRel;
    double scale = std::max(std::abs(oracle), 1e-30);
    c.flags["final_error_within_tol"] =
        std::abs(rec.measured.back() - oracle) <= final_rel_tol * scale;
    c.flags["errors_decreasing_last3"] =
        rec.errors_strictly_decreasing(3, kMonoFloorRel * scale);
    report.cases.push_back(std::move(c));
  };

  auto filtered = [&](double coarsest, double finest) {
    std::vector<double> s;
    for (double e : spec.schedule)
      if (e <= coarsest * (1 + 1e-12) && e >= finest * (1 - 1e-12)) s.push_back(e);
    while (s.size() < 3) s.insert(s.begin(), 2.0 * (s.empty() ? finest : s.front()));
    return s;
  };

  const DomainBox dom1 = DomainBox::unit(1);

  // worked example: Omega=(0,1), D = e^x, psi = x + sin(2 pi ytilde)
  SeparableFunction worked;
  worked.value = [](const Vec3& x, const Vec3& y) { return x[0] + std::sin(2 * M_PI * y[0]); };
  worked.smooth_in_y = true;
  TransformationField Dexp = TransformationField::exp_1d();
  {
    ConvergenceRecord rec = verify_mean_convergence(worked, Dexp, 2, spec.schedule, dom1, opt1d);
    add_case("worked_example_p2", rec, 5.0 / 6.0, 0.01);
  }
  {
    // the signed mean reaches its oscillation-noise floor (~3e-3 relative)
    // around eps = 2^-6; observe the decay on the coarser range
    std::vector<double> sched1 = filtered(1.0, 1.0 / 64);
    ConvergenceRecord rec = verify_mean_convergence(worked, Dexp, 1, sched1, dom1, opt1d);
    add_case("worked_example_p1", rec, 0.5, 0.01);
  }

  // y-independent control: zero error at every eps
  {
    SeparableFunction control;
    control.value = [](const Vec3& x, const Vec3&) { return 1.0 + x[0]; };
    ConvergenceRecord rec =
        verify_mean_convergence(control, TransformationField::identity(), 2, spec.schedule, dom1, opt);
    StudyCase c = make_case("y_independent_control", rec);
    c.metrics["oracle"] = rec.reference;
    // the operator contributes nothing here; what remains is the midpoint
    // quadrature floor of the measurement itself
    c.flags["zero_error"] = true;
    for (const StudyRow& rw : c.rows)
      if (rw.error > 1e-5 * std::abs(rec.reference)) c.flags["zero_error"] = false;
    report.cases.push_back(std::move(c));
  }

  // plywood coefficient, frozen operator, 3D rotation field
  {
    RotationAngleField gamma =
        spec.gamma_constant ? RotationAngleField::constant(spec.gamma_value) : spec.gamma;
    SeparableFunction coeff;
    double a = spec.a;
    coeff.value = [a](const Vec3&, const Vec3& y) {
      double f2 = y[1] - 0.5, f3 = y[2] - 0.5;
      return (f2 * f2 + f3 * f3 <= a * a) ? 1.0 : 2.0;
    };
    coeff.smooth_in_y = false;
    coeff.x_independent = true;
    TransformationField D = TransformationField::plywood_lp(gamma);
    std::vector<double> sched3 = filtered(1.0, 1.0 / 40);  // 3D grids stay tractable
    const DomainBox dom3 = DomainBox::unit(3);
    ConvergenceRecord rec1 = verify_frozen_convergence(coeff, D, 1, sched3, dom3, opt);
    double theta = M_PI * a * a;
    add_case("plywood_coefficient_p1", rec1, 2.0 - theta, 0.01);
    ConvergenceRecord rec2 = verify_frozen_convergence(coeff, D, 2, sched3, dom3, opt);
    add_case("plywood_coefficient_p2", rec2, 4.0 - 3.0 * theta, 0.01);
  }

  // gradient case, 1D worked-example transformation
  {
    SeparableFunction grad1;
    grad1.value = [](const Vec3&, const Vec3& y) { return std::sin(2 * M_PI * y[0]); };
    grad1.grad_y = [](const Vec3&, const Vec3& y) {
      return Vec3(2 * M_PI * std::cos(2 * M_PI * y[0]), 0.0, 0.0);
    };
    ConvergenceRecord rec = verify_gradient_convergence(grad1, Dexp, 2, spec.schedule, dom1, opt1d);
    add_case("gradient_1d_exp", rec, M_PI * M_PI * (1.0 - std::exp(-2.0)), 0.01);
  }

  // gradient case, identity transformation in 2D
  {
    SeparableFunction grad2;
    grad2.value = [](const Vec3&, const Vec3& y) { return std::sin(2 * M_PI * y[0]); };
    grad2.grad_y = [](const Vec3&, const Vec3& y) {
      return Vec3(2 * M_PI * std::cos(2 * M_PI * y[0]), 0.0, 0.0);
    };
    std::vector<double> sched2 = filtered(1.0, 1.0 / 200);
    ConvergenceRecord rec = verify_gradient_convergence(grad2, TransformationField::identity(), 2,
                                                        sched2, DomainBox::unit(2), opt);
    add_case("gradient_identity_2d", rec, 2.0 * M_PI * M_PI, 0.01);
  }

  return report;
}

// ---------------------------------------------------------------------------
// homogenization error study (2D scalar analog)
// ---------------------------------------------------------------------------

namespace {

// gradient of a periodic scalar cell corrector at a unit-cell point
Eigen::Vector2d corrector_gradient(const PeriodicCellGrid& grid, const std::vector<double>& field,
                                   double y1, double y2) {
  const int n = grid.n;
  double s = frac01(y1) * n, t = frac01(y2) * n;
  int i = std::min(static_cast<int>(s), n - 1);
  int j = std::min(static_cast<int>(t), n - 1);
  double xi = s - i, eta = t - j;
  auto node = [n](int aa, int bb) { return ((bb % n + n) % n) * n + ((aa % n + n) % n); };
  double v00 = field[static_cast<std::size_t>(node(i, j))];
  double v10 = field[static_cast<std::size_t>(node(i + 1, j))];
  double v01 = field[static_cast<std::size_t>(node(i, j + 1))];
  double v11 = field[static_cast<std::size_t>(node(i + 1, j + 1))];
  double dxi = (1 - eta) * (v10 - v00) + eta * (v11 - v01);
  double deta = (1 - xi) * (v01 - v00) + xi * (v11 - v10);
  return {dxi * n, deta * n};
}

struct HomogStudyCase {
  std::string name;
  std::function<double(const Vec3&, const Covering&, double)> micro_coeff;  // (x, covering, eps)
  std::function<Eigen::Matrix2d(const Vec3&)> hom_coeff;
  // corrector gradient in cell coordinates, scaled by the macro gradient
  std::function<Eigen::Vector2d(const Vec3& ycell, const Eigen::Vector2d& macro_grad)> corr_grad;
  bool has_oracle = false;
  double oracle_across = 0.0, oracle_along = 0.0;
  double ahom_across = 0.0, ahom_along = 0.0;
};

}  // namespace

StudyReport run_homog_error_study(const StudySpec& spec) {
  spec.validate();
  StudyReport report;
  report.study = "homog_error";
  report.seed = spec.seed;
  report.config_hash = fnv1a_hex(spec.canonical_json());

  const DomainBox dom2 = DomainBox::unit(2);
  const double a1 = spec.phase1, a2 = spec.phase2;

  std::vector<HomogStudyCase> cases;

  // laminate: coefficient a1 for frac(y2) < 1/2 else a2, layers normal to x2
  {
    HomogStudyCase c;
    c.name = "laminate_gamma0";
    PeriodicCellGrid cell = build_cell_scalar(
        [&](double, double y2) { return y2 < 0.5 ? a1 : a2; }, spec.cell_n);
    ScalarCorrectorSet corr = solve_cell_scalar(cell);
    Eigen::Matrix2d ahom = assemble_scalar_hom(cell, corr);
    LaminateScalar oracle = laminate_effective(a1, a2);
    c.has_oracle = true;
    c.oracle_across = oracle.across;
    c.oracle_along = oracle.along;
    c.ahom_along = ahom(0, 0);
    c.ahom_across = ahom(1, 1);
    c.hom_coeff = [ahom](const Vec3&) { return ahom; };
    auto cellgrid = std::make_shared<PeriodicCellGrid>(cell);
    auto corrset = std::make_shared<ScalarCorrectorSet>(corr);
    c.micro_coeff = [a1, a2](const Vec3& x, const Covering& cov, double eps) {
      const CoveringCube& cube = cov.cube_at(x);
      double f = frac01((x[1] - cube.shift[1]) / eps);
      return f < 0.5 ? a1 : a2;
    };
    c.corr_grad = [cellgrid, corrset](const Vec3& y, const Eigen::Vector2d& mg) {
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int dir = 0; dir < 2; ++dir)
        g += mg[dir] * corrector_gradient(*cellgrid, corrset->fields[static_cast<std::size_t>(dir)],
                                          y[0], y[1]);
      return g;
    };
    cases.push_back(std::move(c));
  }

  // locally-periodic perforation-style coefficient: rho varies with x
  {
    HomogStudyCase c;
    c.name = "perforation_lp";
    auto rho_field = [](const Vec3& x) { return 0.15 + 0.15 * x[0]; };
    // a^hom(x) from cell solves at sampled rho, linear interpolation
    const int nrho = 5;
    std::vector<double> rhos;
    std::vector<Eigen::Matrix2d> homs;
    for (int i = 0; i < nrho; ++i) {
      double rho = 0.15 + 0.15 * i / (nrho - 1.0);
      PeriodicCellGrid cell = build_cell_scalar(
          [&](double y1, double y2) {
            double m1 = std::min(y1, 1.0 - y1), m2 = std::min(y2, 1.0 - y2);
            return (m1 * m1 + m2 * m2 <= rho * rho) ? a1 : a2;
          },
          spec.cell_n);
      ScalarCorrectorSet corr = solve_cell_scalar(cell);
      rhos.push_back(rho);
      homs.push_back(assemble_scalar_hom(cell, corr));
    }
    c.hom_coeff = [rho_field, rhos, homs](const Vec3& x) {
      double rho = std::clamp(rho_field(x), rhos.front(), rhos.back());
      std::size_t k = 1;
      while (k + 1 < rhos.size() && rhos[k] < rho) ++k;
      double t = (rho - rhos[k - 1]) / (rhos[k] - rhos[k - 1]);
      return ((1.0 - t) * homs[k - 1] + t * homs[k]).eval();
    };
    c.micro_coeff = [a1, a2, rho_field](const Vec3& x, const Covering& cov, double eps) {
      const CoveringCube& cube = cov.cube_at(x);
      double rho = rho_field(cube.anchor);
      double d2 = 0.0;
      for (int axis = 0; axis < 2; ++axis) {
        double f = frac01((x[axis] - cube.shift[axis]) / eps);
        double m = std::min(f, 1.0 - f);
        d2 += m * m;
      }
      return d2 <= rho * rho ? a1 : a2;
    };
    cases.push_back(std::move(c));
  }

  ScalarBoundaryData bc;
  bc.value = [](const Vec3& x) { return x[0] + x[1]; };
  bc.load = [](const Vec3&) { return 1.0; };

  for (HomogStudyCase& hc : cases) {
    StudyCase out;
    out.name = hc.name;

    MacroMesh mesh = MacroMesh::structured(dom2, Vec3i(spec.fine_n, spec.fine_n, 0));
    MacroSolution uhom = solve_macro_scalar(hc.hom_coeff, bc, mesh, 1e-9);
    CentroidGradients ghom = centroid_gradients(uhom);

    std::vector<double> h1_norms;
    bool corrector_improves = true;
    for (double eps : spec.schedule) {
      CoveringOptions copts;
      copts.field = TransformationField::identity();
      Covering covering = build_covering(dom2, eps, spec.r, copts);
      MacroSolution ueps = solve_direct_micro_scalar(
          [&](const Vec3& x) { return hc.micro_coeff(x, covering, eps); }, eps, bc, mesh, 1e-9);

      // L2 error of u: the difference is a nodal field on the same mesh
      MacroSolution diff = ueps;
      for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= uhom.values[i];
      double err = l2_norm_scalar(diff);

      StudyRow row;
      row.epsilon = eps;
      row.measured = err;
      row.reference = 0.0;
      row.error = err;
      out.rows.push_back(row);

      // gradient errors at element centroids
      CentroidGradients geps = centroid_gradients(ueps);
      double plain = 0.0, enhanced = 0.0;
      double volel = mesh.h(0) * mesh.h(1);
      for (long e = 0; e < mesh.element_count(); ++e) {
        long i = e % mesh.cells[0], j = e / mesh.cells[0];
        Vec3 xc(dom2.lower[0] + (i + 0.5) * mesh.h(0), dom2.lower[1] + (j + 0.5) * mesh.h(1), 0.0);
        Eigen::Vector2d gd(geps.grad(e, 0, 0), geps.grad(e, 0, 1));
        Eigen::Vector2d gh(ghom.grad(e, 0, 0), ghom.grad(e, 0, 1));
        plain += volel * (gd - gh).squaredNorm();
        if (hc.corr_grad) {
          const CoveringCube& cube = covering.cube_at(xc);
          Vec3 y((xc[0] - cube.shift[0]) / eps, (xc[1] - cube.shift[1]) / eps, 0.0);
          Eigen::Vector2d corr = hc.corr_grad(y, gh);
          enhanced += volel * (gd - gh - corr).squaredNorm();
        }
      }
      plain = std::sqrt(plain);
      enhanced = std::sqrt(enhanced);
      if (hc.corr_grad && !(enhanced < plain)) corrector_improves = false;
      out.metrics["plain_grad_err_eps_" + std::to_string(eps)] = plain;
      if (hc.corr_grad) out.metrics["enhanced_grad_err_eps_" + std::to_string(eps)] = enhanced;

      double h1 = std::sqrt(h1_seminorm_scalar(ueps) * h1_seminorm_scalar(ueps) +
                            l2_norm_scalar(ueps) * l2_norm_scalar(ueps));
      h1_norms.push_back(h1);
      out.metrics["h1_norm_eps_" + std::to_string(eps)] = h1;
    }

    out.fitted_order = fitted_slope(out.rows);
    out.flags["l2_error_strictly_decreasing"] = rows_strictly_decreasing(out.rows, 3, 0.0);
    if (hc.corr_grad) out.flags["corrector_improves_gradient"] = corrector_improves;
    double hmax = *std::max_element(h1_norms.begin(), h1_norms.end());
    double hmin = *std::min_element(h1_norms.begin(), h1_norms.end());
    out.metrics["h1_ratio"] = hmax / hmin;
    out.flags["h1_ratio_below_1_5"] = hmax / hmin <= 1.5;
    if (hc.has_oracle) {
      out.metrics["ahom_across"] = hc.ahom_across;
      out.metrics["ahom_along"] = hc.ahom_along;
      out.metrics["oracle_across"] = hc.oracle_across;
      out.metrics["oracle_along"] = hc.oracle_along;
      out.flags["ahom_matches_oracle"] =
          std::abs(hc.ahom_across - hc.oracle_across) <= 0.01 * hc.oracle_across &&
          std::abs(hc.ahom_along - hc.oracle_along) <= 0.01 * hc.oracle_along;
    }
    report.cases.push_back(std::move(out));
  }
  return report;
}

// ---------------------------------------------------------------------------
// lp/np discrepancy trend
// ---------------------------------------------------------------------------

StudyReport run_lp_np_trend(const StudySpec& spec) {
  spec.validate();
  StudyReport report;
  report.study = "lp_np_trend";
  report.seed = spec.seed;
  report.config_hash = fnv1a_hex(spec.canonical_json());

  RotationAngleField gamma =
      spec.gamma_constant ? RotationAngleField::constant(spec.gamma_value) : spec.gamma;
  IndicatorSpec ind = IndicatorSpec::plywood_np(spec.a, gamma);

  StudyCase c;
  c.name = spec.gamma_constant ? "lp_np_gamma_constant" : "lp_np_default_gamma";
  for (double eps : spec.schedule) {
    DiscrepancyEstimate est = lp_np_discrepancy(ind, eps, spec.r, spec.mc_samples, spec.seed);
    StudyRow row;
    row.epsilon = eps;
    row.measured = est.measure;
    row.reference = 0.0;
    row.error = est.measure;
    c.rows.push_back(row);
    c.metrics["std_error_eps_" + std::to_string(eps)] = est.std_error;
  }
  double slope = fitted_slope(c.rows);
  c.fitted_order = slope;
  c.metrics["fitted_slope"] = slope;
  c.metrics["target_slope_3r_minus_2"] = 3.0 * spec.r - 2.0;

  if (spec.gamma_constant) {
    bool all_zero = true;
    for (const StudyRow& row : c.rows)
      if (row.measured != 0.0) all_zero = false;
    c.flags["zero_discrepancy"] = all_zero;
  } else {
    c.flags["strictly_decreasing"] = rows_strictly_decreasing(c.rows, static_cast<int>(c.rows.size()), 0.0);
    c.flags["positive_slope"] = slope > 0.0;
    double target = 3.0 * spec.r - 2.0;
    c.flags["slope_within_band"] = std::abs(slope - target) <= 0.5 * target;
  }
  report.cases.push_back(std::move(c));
  return report;
}

}  // namespace lphom
