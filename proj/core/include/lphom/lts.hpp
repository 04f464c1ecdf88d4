#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lphom/covering.hpp"
#include "lphom/geometry.hpp"
#include "lphom/transform.hpp"

namespace lphom {

/// psi(x, y) = psitilde(x, D_x^{-1} y) with psitilde periodic on the unit
/// cell in its second argument. Operators reduce the fast argument to
/// [0,1)^d before calling, so callables only need to be defined there.
struct SeparableFunction {
  std::function<double(const Vec3& x, const Vec3& ytilde)> value;
  std::function<Vec3(const Vec3& x, const Vec3& ytilde)> grad_y;  // optional

  bool smooth_in_y = true;     // false for indicator-type coefficients
  bool x_independent = false;  // cell averages do not depend on x

  /// Sampled check of unit-cell periodicity of the callable itself.
  void check_periodicity(int dim, int samples = 128, double tol = 1e-9) const;
  /// Sampled check of grad_y against central differences (smooth psi only).
  void check_gradient(int dim, int samples = 64, double tol = 1e-6) const;
};

/// Tensor-product midpoint quadrature over a box at n points per axis.
struct QuadratureGrid {
  DomainBox box;
  int n = 0;  // points per axis

  long size() const {
    long t = 1;
    for (int a = 0; a < box.dim; ++a) t *= n;
    return t;
  }
  double weight() const { return box.volume() / static_cast<double>(size()); }
  Vec3 node(long flat) const;

  /// Midpoint grid resolving oscillations of scale eps: at least
  /// min_per_eps points per eps per axis, rounded up to a prime count so
  /// the grid never aliases a dyadic microstructure.
  static QuadratureGrid resolving(const DomainBox& box, double eps, int min_per_eps = 8);

  double integrate(const std::function<double(const Vec3&)>& f) const;
};

/// Smallest prime >= n.
long next_prime(long n);

/// Values sampled at the nodes of a QuadratureGrid.
struct GridFunction {
  QuadratureGrid grid;
  std::vector<double> values;

  static GridFunction sample(const QuadratureGrid& grid,
                             const std::function<double(const Vec3&)>& f);
  double l2_norm_sq() const;
};

/// One convergence study: schedule, measured integrals, reference, errors,
/// and least-squares fitted order in eps (first point dropped).
struct ConvergenceRecord {
  std::vector<double> schedule;
  std::vector<double> measured;
  double reference = 0.0;
  std::vector<double> abs_error;
  double fitted_order = 0.0;
  std::vector<double> running_order;  // pairwise order vs previous row

  void finalize();  // fills abs_error / orders from schedule+measured+reference
  bool errors_strictly_decreasing(int last_k = 3, double floor_abs = 0.0) const;
  std::string to_csv() const;
};

/// Options shared by the verification harness.
struct LtsOptions {
  double r = 0.5;
  AnchorRule anchors = AnchorRule::center;
  std::uint64_t seed = 0;
  int min_pts_per_eps = 8;
  int x_quadrature_points = 16;   // Gauss points per axis for reference x-integrals
  int cell_gauss_points = 64;     // per axis, smooth psitilde
  int cell_midpoint_points = 1024;  // per axis, indicator psitilde (with Richardson check)
};

/// (L^eps psi)(x) = psitilde(x, D^{-1}_{x_n}(x - xtilde_n)/eps mod 1).
double eval_Leps(const SeparableFunction& psi, const TransformationField& D,
                 const Covering& covering, double epsilon, const Vec3& x);

/// (L^eps_0 psi)(x): slow argument frozen at the cube anchor x_n.
double eval_Leps0(const SeparableFunction& psi, const TransformationField& D,
                  const Covering& covering, double epsilon, const Vec3& x);

/// (L^eps_rho psi)(x) = sum_n psitilde(x, D^{-1}_{x_n} x / eps) phi_n(x).
double eval_Leps_rho(const SeparableFunction& psi, const TransformationField& D,
                     const Covering& covering, const MollifiedCutoff& cutoff, double epsilon,
                     const Vec3& x);

/// Reference value: int_Omega avg_{Y_x} |psi|^p dy dx
///                 = int_Omega int_Y |psitilde(x, ytilde)|^p dytilde dx.
/// For p = 1 the signed mean is taken instead of |.|.
double lts_reference(const SeparableFunction& psi, const TransformationField& D,
                     const DomainBox& domain, int p, bool signed_p1, const LtsOptions& opt);

/// int_Omega |L^eps psi|^p dx against the cell-average reference, over an
/// eps schedule (Lemma-type mean convergence for the full operator).
ConvergenceRecord verify_mean_convergence(const SeparableFunction& psi,
                                          const TransformationField& D, int p,
                                          std::span<const double> schedule,
                                          const DomainBox& domain, const LtsOptions& opt = {});

/// Same with the frozen operator L^eps_0; valid for coefficients that are
/// merely integrable in ytilde (plywood indicator coefficients).
ConvergenceRecord verify_frozen_convergence(const SeparableFunction& psi,
                                            const TransformationField& D, int p,
                                            std::span<const double> schedule,
                                            const DomainBox& domain, const LtsOptions& opt = {});

/// Gradient variant: measures int |L^eps (grad_y psi)|^p with the chain rule
/// grad_y psi = D^{-T}_{x_n} grad_ytilde psitilde.
ConvergenceRecord verify_gradient_convergence(const SeparableFunction& psi,
                                              const TransformationField& D, int p,
                                              std::span<const double> schedule,
                                              const DomainBox& domain, const LtsOptions& opt = {});

/// Two-scale pairing int_Omega u(x) (L^eps psi)(x) dx on the grid carrying u.
double lts_pairing(const GridFunction& u, const SeparableFunction& psi,
                   const TransformationField& D, const Covering& covering, double epsilon);

/// Strong l-t-s criterion: lim ||u^eps||^2_{L2} = int avg |u|^2.
struct StrongLtsResult {
  ConvergenceRecord record;
  bool satisfied = false;
};
StrongLtsResult strong_lts_check(std::span<const GridFunction> u_schedule,
                                 std::span<const double> schedule, const SeparableFunction& limit,
                                 const TransformationField& D, const DomainBox& domain,
                                 double rel_tol, const LtsOptions& opt = {});

}  // namespace lphom
