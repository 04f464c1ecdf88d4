#include "lphom/lts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lphom/log.hpp"
#include "lphom/parallel.hpp"

namespace lphom {

namespace {

// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // initial guess (Chebyshev), Newton on P_n
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], reversed order is fine
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

double power_p(double v, int p) { return p == 2 ? v * v : std::abs(v); }

}  // namespace

void SeparableFunction::check_periodicity(int dim, int samples, double tol) const {
  Rng rng(0x9e11);
  for (int s = 0; s < samples; ++s) {
    Vec3 x = Vec3::Zero(), y = Vec3::Zero();
    for (int a = 0; a < dim; ++a) {
      x[a] = rng.uniform01();
      y[a] = rng.uniform01();
    }
    int axis = static_cast<int>(rng.bits() % static_cast<std::uint64_t>(dim));
    Vec3 yk = y;
    yk[axis] += 1.0;
    if (std::abs(value(x, y) - value(x, yk)) > tol)
      throw InvalidArgument("SeparableFunction: callable is not unit-cell periodic");
  }
}

void SeparableFunction::check_gradient(int dim, int samples, double tol) const {
  if (!grad_y) throw InvalidArgument("SeparableFunction: no gradient callable");
  Rng rng(0x9e12);
  const double h = 1e-6;
  for (int s = 0; s < samples; ++s) {
    Vec3 x = Vec3::Zero(), y = Vec3::Zero();
    for (int a = 0; a < dim; ++a) {
      x[a] = rng.uniform01();
      y[a] = 0.2 + 0.6 * rng.uniform01();
    }
    Vec3 g = grad_y(x, y);
    for (int a = 0; a < dim; ++a) {
      Vec3 yp = y, ym = y;
      yp[a] += h;
      ym[a] -= h;
      double fd = (value(x, yp) - value(x, ym)) / (2 * h);
      if (std::abs(fd - g[a]) > tol * std::max(1.0, std::abs(fd)))
        throw InvalidArgument("SeparableFunction: grad_y disagrees with finite differences");
    }
  }
}

long next_prime(long n) {
  if (n <= 2) return 2;
  if (n % 2 == 0) ++n;
  for (;; n += 2) {
    bool prime = true;
    for (long q = 3; q * q <= n; q += 2) {
      if (n % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) return n;
  }
}

Vec3 QuadratureGrid::node(long flat) const {
  Vec3 x = Vec3::Zero();
  long rem = flat;
  for (int a = 0; a < box.dim; ++a) {
    long i = rem % n;
    rem /= n;
    x[a] = box.lower[a] + box.side(a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  }
  return x;
}

QuadratureGrid QuadratureGrid::resolving(const DomainBox& box, double eps, int min_per_eps) {
  double maxside = 0.0;
  for (int a = 0; a < box.dim; ++a) maxside = std::max(maxside, box.side(a));
  long need = static_cast<long>(std::ceil(min_per_eps * maxside / eps));
  QuadratureGrid g;
  g.box = box;
  g.n = static_cast<int>(next_prime(need));
  return g;
}

double QuadratureGrid::integrate(const std::function<double(const Vec3&)>& f) const {
  double w = weight();
  return w * parallel_reduce(size(), [&](std::int64_t i) { return f(node(i)); });
}

GridFunction GridFunction::sample(const QuadratureGrid& grid,
                                  const std::function<double(const Vec3&)>& f) {
  GridFunction gf;
  gf.grid = grid;
  gf.values.resize(static_cast<std::size_t>(grid.size()));
  parallel_for(grid.size(), [&](std::int64_t i) { gf.values[static_cast<std::size_t>(i)] = f(grid.node(i)); });
  return gf;
}

double GridFunction::l2_norm_sq() const {
  double w = grid.weight();
  return w * parallel_reduce(static_cast<std::int64_t>(values.size()),
                             [&](std::int64_t i) { double v = values[static_cast<std::size_t>(i)]; return v * v; });
}

void ConvergenceRecord::finalize() {
  abs_error.clear();
  running_order.assign(schedule.size(), 0.0);
  for (double m : measured) abs_error.push_back(std::abs(m - reference));
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    double e0 = std::max(abs_error[i - 1], 1e-300), e1 = std::max(abs_error[i], 1e-300);
    running_order[i] = std::log(e0 / e1) / std::log(schedule[i - 1] / schedule[i]);
  }
  // least-squares slope of log(err) vs log(eps), first (pre-asymptotic) point dropped
  std::vector<double> lx, ly;
  for (std::size_t i = (schedule.size() > 3 ? 1u : 0u); i < schedule.size(); ++i) {
    lx.push_back(std::log(schedule[i]));
    ly.push_back(std::log(std::max(abs_error[i], 1e-300)));
  }
  double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double denom = n * sxx - sx * sx;
  fitted_order = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

bool ConvergenceRecord::errors_strictly_decreasing(int last_k, double floor_abs) const {
  int n = static_cast<int>(abs_error.size());
  int begin = std::max(0, n - last_k);
  for (int i = begin; i + 1 < n; ++i) {
    bool below_floor = abs_error[i] <= floor_abs && abs_error[i + 1] <= floor_abs;
    if (!(abs_error[i] > abs_error[i + 1]) && !below_floor) return false;
  }
  return true;
}

std::string ConvergenceRecord::to_csv() const {
  std::string out = "epsilon,measured,reference,abs_error,fitted_order_running\n";
  char buf[256];
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", schedule[i], measured[i],
                  reference, abs_error[i], running_order[i]);
    out += buf;
  }
  return out;
}

double eval_Leps(const SeparableFunction& psi, const TransformationField& D,
                 const Covering& covering, double epsilon, const Vec3& x) {
  const CoveringCube& cube = covering.cube_at(x);
  Vec3 y = D.Dinv(cube.anchor) * (x - cube.shift) / epsilon;
  for (int a = 0; a < covering.domain.dim; ++a) y[a] = frac01(y[a]);
  for (int a = covering.domain.dim; a < 3; ++a) y[a] = 0.0;
  return psi.value(x, y);
}

double eval_Leps0(const SeparableFunction& psi, const TransformationField& D,
                  const Covering& covering, double epsilon, const Vec3& x) {
  const CoveringCube& cube = covering.cube_at(x);
  Vec3 y = D.Dinv(cube.anchor) * (x - cube.shift) / epsilon;
  for (int a = 0; a < covering.domain.dim; ++a) y[a] = frac01(y[a]);
  for (int a = covering.domain.dim; a < 3; ++a) y[a] = 0.0;
  return psi.value(cube.anchor, y);
}

double eval_Leps_rho(const SeparableFunction& psi, const TransformationField& D,
                     const Covering& covering, const MollifiedCutoff& cutoff, double epsilon,
                     const Vec3& x) {
  int id = covering.find_cube(x);
  if (id < 0) throw InvalidArgument("eval_Leps_rho: point outside the covered domain");
  double phi = cutoff.value(x, id);
  if (phi == 0.0) return 0.0;
  const CoveringCube& cube = covering.cubes[static_cast<std::size_t>(id)];
  Vec3 y = D.Dinv(cube.anchor) * x / epsilon;
  for (int a = 0; a < covering.domain.dim; ++a) y[a] = frac01(y[a]);
  for (int a = covering.domain.dim; a < 3; ++a) y[a] = 0.0;
  return psi.value(x, y) * phi;
}

namespace {

// int_Y f(x, ytilde) dytilde with quadrature adapted to smoothness.
struct CellAverager {
  const SeparableFunction* psi;
  int dim;
  int p;
  bool signed_p1;
  bool gradient;
  const TransformationField* D;  // for the gradient chain rule at slow x
  const LtsOptions* opt;

  double integrand(const Vec3& x, const Vec3& y) const {
    if (!gradient) {
      double v = psi->value(x, y);
      return (p == 1 && signed_p1) ? v : power_p(v, p);
    }
    Vec3 g = D->Dinv(x).transpose() * psi->grad_y(x, y);
    return power_p(g.norm(), p);
  }

  double average_at(const Vec3& x) const {
    if (psi->smooth_in_y || gradient) {
      int m = dim == 3 ? 24 : opt->cell_gauss_points;
      std::vector<double> nodes, weights;
      gauss_legendre(m, nodes, weights);
      long total = 1;
      for (int a = 0; a < dim; ++a) total *= m;
      return parallel_reduce(total, [&](std::int64_t flat) {
        long rem = flat;
        Vec3 y = Vec3::Zero();
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
          long i = rem % m;
          rem /= m;
          y[a] = nodes[static_cast<std::size_t>(i)];
          w *= weights[static_cast<std::size_t>(i)];
        }
        return w * integrand(x, y);
      });
    }
    // indicator-type: midpoint with a Richardson consistency check
    int m = dim == 3 ? 256 : opt->cell_midpoint_points;
    auto midpoint = [&](int mm) {
      long total = 1;
      for (int a = 0; a < dim; ++a) total *= mm;
      double s = parallel_reduce(total, [&](std::int64_t flat) {
        long rem = flat;
        Vec3 y = Vec3::Zero();
        for (int a = 0; a < dim; ++a) {
          long i = rem % mm;
          rem /= mm;
          y[a] = (static_cast<double>(i) + 0.5) / mm;
        }
        return integrand(x, y);
      });
      return s / static_cast<double>(total);
    };
    double coarse = midpoint(m / 2);
    double fine = midpoint(m);
    if (std::abs(fine - coarse) > 1e-2 * std::max(1.0, std::abs(fine)))
      throw SolverError("cell average quadrature not resolved for indicator coefficient");
    return fine;
  }
};

double lts_reference_general(const SeparableFunction& psi, const TransformationField& D,
                             const DomainBox& domain, int p, bool signed_p1, bool gradient,
                             const LtsOptions& opt) {
  CellAverager avg{&psi, domain.dim, p, signed_p1, gradient, &D, &opt};
  if (psi.x_independent && !gradient) {
    Vec3 x0 = domain.center();
    return domain.volume() * avg.average_at(x0);
  }
  int m = opt.x_quadrature_points;
  std::vector<double> nodes, weights;
  gauss_legendre(m, nodes, weights);
  long total = 1;
  for (int a = 0; a < domain.dim; ++a) total *= m;
  double acc = 0.0;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    Vec3 x = Vec3::Zero();
    double w = 1.0;
    for (int a = 0; a < domain.dim; ++a) {
      long i = rem % m;
      rem /= m;
      x[a] = domain.lower[a] + domain.side(a) * nodes[static_cast<std::size_t>(i)];
      w *= weights[static_cast<std::size_t>(i)] * domain.side(a);
    }
    acc += w * avg.average_at(x);
  }
  return acc;
}

}  // namespace

double lts_reference(const SeparableFunction& psi, const TransformationField& D,
                     const DomainBox& domain, int p, bool signed_p1, const LtsOptions& opt) {
  return lts_reference_general(psi, D, domain, p, signed_p1, false, opt);
}

namespace {

ConvergenceRecord verify_run(const SeparableFunction& psi, const TransformationField& D, int p,
                             std::span<const double> schedule, const DomainBox& domain,
                             const LtsOptions& opt, bool frozen, bool gradient) {
  if (p != 1 && p != 2) throw InvalidArgument("verify: p must be 1 or 2");
  if (gradient && !psi.grad_y)
    throw InvalidArgument("verify_gradient_convergence: psi has no gradient callable");
  if (schedule.empty()) throw InvalidArgument("verify: empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] < schedule[i - 1]))
      throw InvalidArgument("verify: schedule must be strictly decreasing");
  if (opt.min_pts_per_eps < 8) {
    double maxside = 0.0;
    for (int a = 0; a < domain.dim; ++a) maxside = std::max(maxside, domain.side(a));
    throw ResolutionError("verify: grid must resolve eps oscillations (h <= eps/8)",
                          static_cast<long>(std::ceil(8.0 * maxside / schedule.back())));
  }

  const bool signed_p1 = (p == 1);
  ConvergenceRecord rec;
  rec.schedule.assign(schedule.begin(), schedule.end());
  rec.reference = lts_reference_general(psi, D, domain, p, signed_p1, gradient, opt);

  for (double eps : schedule) {
    CoveringOptions copts;
    copts.anchors = opt.anchors;
    copts.seed = opt.seed;
    copts.field = D;
    Covering covering = build_covering(domain, eps, opt.r, copts);
    QuadratureGrid grid = QuadratureGrid::resolving(domain, eps, opt.min_pts_per_eps);
    double w = grid.weight();
    double measured = w * parallel_reduce(grid.size(), [&](std::int64_t i) {
      Vec3 x = grid.node(i);
      const CoveringCube& cube = covering.cube_at(x);
      Vec3 y = D.Dinv(cube.anchor) * (x - cube.shift) / eps;
      for (int a = 0; a < domain.dim; ++a) y[a] = frac01(y[a]);
      for (int a = domain.dim; a < 3; ++a) y[a] = 0.0;
      if (gradient) {
        Vec3 g = D.Dinv(cube.anchor).transpose() * psi.grad_y(frozen ? cube.anchor : x, y);
        return power_p(g.norm(), p);
      }
      double v = psi.value(frozen ? cube.anchor : x, y);
      return signed_p1 ? v : power_p(v, p);
    });
    rec.measured.push_back(measured);
    LPHOM_LOG_DEBUG("verify eps=%g measured=%.12g grid=%d^%d", eps, measured, grid.n, domain.dim);
  }
  rec.finalize();
  return rec;
}

}  // namespace

ConvergenceRecord verify_mean_convergence(const SeparableFunction& psi,
                                          const TransformationField& D, int p,
                                          std::span<const double> schedule,
                                          const DomainBox& domain, const LtsOptions& opt) {
  return verify_run(psi, D, p, schedule, domain, opt, /*frozen=*/false, /*gradient=*/false);
}

ConvergenceRecord verify_frozen_convergence(const SeparableFunction& psi,
                                            const TransformationField& D, int p,
                                            std::span<const double> schedule,
                                            const DomainBox& domain, const LtsOptions& opt) {
  return verify_run(psi, D, p, schedule, domain, opt, /*frozen=*/true, /*gradient=*/false);
}

ConvergenceRecord verify_gradient_convergence(const SeparableFunction& psi,
                                              const TransformationField& D, int p,
                                              std::span<const double> schedule,
                                              const DomainBox& domain, const LtsOptions& opt) {
  return verify_run(psi, D, p, schedule, domain, opt, /*frozen=*/false, /*gradient=*/true);
}

double lts_pairing(const GridFunction& u, const SeparableFunction& psi,
                   const TransformationField& D, const Covering& covering, double epsilon) {
  if (std::abs(covering.epsilon - epsilon) > 1e-15)
    throw InvalidArgument("lts_pairing: covering built for a different epsilon");
  const QuadratureGrid& grid = u.grid;
  double w = grid.weight();
  return w * parallel_reduce(grid.size(), [&](std::int64_t i) {
    Vec3 x = grid.node(i);
    return u.values[static_cast<std::size_t>(i)] * eval_Leps(psi, D, covering, epsilon, x);
  });
}

StrongLtsResult strong_lts_check(std::span<const GridFunction> u_schedule,
                                 std::span<const double> schedule, const SeparableFunction& limit,
                                 const TransformationField& D, const DomainBox& domain,
                                 double rel_tol, const LtsOptions& opt) {
  if (u_schedule.size() != schedule.size())
    throw InvalidArgument("strong_lts_check: schedule size mismatch");
  StrongLtsResult res;
  res.record.schedule.assign(schedule.begin(), schedule.end());
  res.record.reference = lts_reference(limit, D, domain, 2, false, opt);
  for (const GridFunction& u : u_schedule) res.record.measured.push_back(u.l2_norm_sq());
  res.record.finalize();
  double scale = std::max({std::abs(res.record.reference), 1e-12});
  res.satisfied = res.record.abs_error.back() <= rel_tol * scale;
  return res;
}

}  // namespace lphom
