#include "lphom/microstructure.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lphom/parallel.hpp"

namespace lphom {

namespace {
using json = nlohmann::ordered_json;

void check_radius(double a) {
  if (!(a >= 0.0) || !(a < 0.5))
    throw InvalidArgument("IndicatorSpec: fibre radius fraction a must lie in [0, 1/2)");
}
}  // namespace

IndicatorSpec IndicatorSpec::plywood_lp(double a, const RotationAngleField& gamma) {
  check_radius(a);
  IndicatorSpec s;
  s.variant = Variant::plywood_lp;
  s.a = a;
  s.gamma = gamma;
  return s;
}

IndicatorSpec IndicatorSpec::plywood_np(double a, const RotationAngleField& gamma) {
  check_radius(a);
  IndicatorSpec s;
  s.variant = Variant::plywood_np;
  s.a = a;
  s.gamma = gamma;
  return s;
}

IndicatorSpec IndicatorSpec::perforation(const std::function<double(const Vec3&)>& rho,
                                         double rho_min, double rho_max) {
  if (!(rho_min > 0.0) || !(rho_max < 1.0) || !(rho_min <= rho_max))
    throw InvalidArgument("IndicatorSpec: perforation bounds need 0 < rho_min <= rho_max < 1");
  IndicatorSpec s;
  s.variant = Variant::perforation;
  s.rho = rho;
  s.rho_min = rho_min;
  s.rho_max = rho_max;
  return s;
}

int plywood_indicator_lp(const IndicatorSpec& spec, const Covering& covering, double epsilon,
                         const Vec3& x) {
  if (covering.domain.dim != 3)
    throw InvalidArgument("plywood_indicator_lp: plywood lives in a 3D covering");
  const CoveringCube& cube = covering.cube_at(x);  // throws outside Omega
  // D^{-1} = R(gamma(anchor_3))
  Mat3 R = rotation(spec.gamma.gamma(cube.anchor[2]));
  Vec3 y = R * (x - cube.shift) / epsilon;
  double f2 = frac01(y[1]) - 0.5;
  double f3 = frac01(y[2]) - 0.5;
  return (f2 * f2 + f3 * f3 <= spec.a * spec.a) ? 1 : 0;
}

int plywood_indicator_np(const IndicatorSpec& spec, double epsilon, const Vec3& x) {
  const double a = spec.a;
  double t3 = x[2] / epsilon;
  for (int d3 = -1; d3 <= 1; ++d3) {
    double k3 = std::round(t3) + d3;
    double f3 = t3 - k3;
    if (std::abs(f3) > a) continue;
    double alpha = spec.gamma.gamma(epsilon * k3);
    double rx2 = (-std::sin(alpha) * x[0] + std::cos(alpha) * x[1]) / epsilon;
    double f2 = rx2 - std::round(rx2);
    if (f2 * f2 + f3 * f3 <= a * a) return 1;
  }
  return 0;
}

int perforation_indicator(const IndicatorSpec& spec, const Covering& covering, double epsilon,
                          const Vec3& x) {
  const CoveringCube& cube = covering.cube_at(x);
  double rho = spec.rho(cube.anchor);
  if (!(rho > 0.0) || !(rho < 1.0))
    throw InvalidArgument("perforation_indicator: rho(x_n) outside (0, 1)");
  double dist2 = 0.0;
  for (int aaxis = 0; aaxis < covering.domain.dim; ++aaxis) {
    double f = frac01((x[aaxis] - cube.shift[aaxis]) / epsilon);
    double m = std::min(f, 1.0 - f);
    dist2 += m * m;
  }
  return dist2 <= rho * rho ? 1 : 0;
}

double fiber_shift_bound(double radius, double length, const Vec3& tau, int resolution) {
  const double tnorm = tau.norm();
  if (!(tnorm >= 0.0)) throw InvalidArgument("fiber_shift_bound: bad shift");
  if (tnorm == 0.0) return 0.0;
  const double h = radius / resolution;
  // voxel error ~ interface * h; demand h small against |tau|
  if (h > tnorm / 16.0)
    throw ResolutionError("fiber_shift_bound: voxel size too coarse for this shift",
                          static_cast<long>(std::ceil(16.0 * radius / tnorm)));

  auto theta = [&](const Vec3& p) {
    return p[0] >= 0.0 && p[0] <= length && p[1] * p[1] + p[2] * p[2] <= radius * radius;
  };
  const double m = radius + tnorm + 2.0 * h;
  const Vec3 lo(-tnorm - 2.0 * h, -m, -m);
  const Vec3 hi(length + tnorm + 2.0 * h, m, m);
  long n0 = static_cast<long>(std::ceil((hi[0] - lo[0]) / h));
  long n1 = static_cast<long>(std::ceil((hi[1] - lo[1]) / h));
  long n2 = static_cast<long>(std::ceil((hi[2] - lo[2]) / h));
  long count = static_cast<long>(parallel_reduce(n0 * n1 * n2, [&](std::int64_t flat) {
    long i2 = flat % n2;
    long i1 = (flat / n2) % n1;
    long i0 = flat / (n1 * n2);
    Vec3 p(lo[0] + (i0 + 0.5) * h, lo[1] + (i1 + 0.5) * h, lo[2] + (i2 + 0.5) * h);
    return theta(p + tau) != theta(p) ? 1.0 : 0.0;
  }));
  double measure = static_cast<double>(count) * h * h * h;
  return measure / (radius * length * tnorm);
}

namespace {

// locally-periodic approximation of the non-periodic plywood on one cube:
// theta-hat(x_n, R_{kappa_n}(x - x_n)/eps) with the W(x_n)-sheared lattice
int lp_approx_indicator(const IndicatorSpec& spec, double epsilon, double side, const Vec3& x) {
  // cube center
  Vec3 c;
  for (int axis = 0; axis < 3; ++axis) c[axis] = (std::floor(x[axis] / side) + 0.5) * side;
  // kappa_n: lattice point with R^{-1} eps kappa close to the cube center
  double k3 = std::round(c[2] / epsilon);
  double alpha = spec.gamma.gamma(epsilon * k3);
  const double cg = std::cos(alpha), sg = std::sin(alpha);
  double rc1 = (cg * c[0] + sg * c[1]) / epsilon;
  double rc2 = (-sg * c[0] + cg * c[1]) / epsilon;
  double k1 = std::round(rc1), k2 = std::round(rc2);
  // x_n = R^{-1} eps kappa
  Vec3 xn(cg * epsilon * k1 - sg * epsilon * k2, sg * epsilon * k1 + cg * epsilon * k2,
          epsilon * k3);
  double w = spec.gamma.dgamma(xn[2]) * (cg * xn[0] + sg * xn[1]);
  // z = R(alpha)(x - x_n)/eps, fibre iff z in sheared lattice tube
  Vec3 d = x - xn;
  double z2 = (-sg * d[0] + cg * d[1]) / epsilon;
  double z3 = d[2] / epsilon;
  const double a = spec.a;
  for (int dm = -1; dm <= 1; ++dm) {
    double m3 = std::round(z3) + dm;
    double f3 = z3 - m3;
    if (std::abs(f3) > a) continue;
    double m2 = std::round(z2 - w * m3);
    double f2 = z2 - m2 - w * m3;
    if (f2 * f2 + f3 * f3 <= a * a) return 1;
  }
  return 0;
}

}  // namespace

DiscrepancyEstimate lp_np_discrepancy(const IndicatorSpec& spec, double epsilon, double r,
                                      long samples, std::uint64_t seed, const DomainBox& domain) {
  if (!(r > 2.0 / 3.0) || !(r < 1.0))
    throw InvalidArgument("lp_np_discrepancy: requires 2/3 < r < 1");
  if (domain.dim != 3) throw InvalidArgument("lp_np_discrepancy: 3D domain required");
  const double side = std::pow(epsilon, r);

  // common random points across eps values (callers reuse the seed)
  std::vector<Vec3> pts(static_cast<std::size_t>(samples));
  {
    Rng rng(seed);
    for (auto& p : pts)
      for (int axis = 0; axis < 3; ++axis)
        p[axis] = domain.lower[axis] + domain.side(axis) * rng.uniform01();
  }
  double hits = parallel_reduce(samples, [&](std::int64_t i) {
    const Vec3& p = pts[static_cast<std::size_t>(i)];
    int chi_np = plywood_indicator_np(spec, epsilon, p);
    int chi_lp = lp_approx_indicator(spec, epsilon, side, p);
    return chi_np != chi_lp ? 1.0 : 0.0;
  });
  double frac = hits / static_cast<double>(samples);
  DiscrepancyEstimate est;
  est.samples = samples;
  est.measure = frac * domain.volume();
  est.std_error = domain.volume() * std::sqrt(std::max(frac * (1.0 - frac), 0.0) /
                                              static_cast<double>(samples));
  return est;
}

double write_voxels(const std::string& path_base, const std::function<int(const Vec3&)>& chi,
                    const DomainBox& domain, const Vec3i& shape, double epsilon,
                    const std::string& variant, const std::string& parameters_json) {
  const int d = domain.dim;
  long n1 = shape[0], n2 = d >= 2 ? shape[1] : 1, n3 = d >= 3 ? shape[2] : 1;
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n1 * n2 * n3));
  parallel_for(n1 * n2 * n3, [&](std::int64_t flat) {
    long i3 = flat % n3;
    long i2 = (flat / n3) % n2;
    long i1 = flat / (n2 * n3);
    Vec3 x = Vec3::Zero();
    long idx[3] = {i1, i2, i3};
    long nn[3] = {n1, n2, n3};
    for (int axis = 0; axis < d; ++axis)
      x[axis] = domain.lower[axis] + domain.side(axis) * (idx[axis] + 0.5) / nn[axis];
    bytes[static_cast<std::size_t>(flat)] = static_cast<std::uint8_t>(chi(x));
  });
  double fraction = 0.0;
  for (std::uint8_t b : bytes) fraction += b;
  fraction /= static_cast<double>(bytes.size());

  {
    std::ofstream raw(path_base + ".raw", std::ios::binary);
    if (!raw) throw InvalidArgument("write_voxels: cannot open " + path_base + ".raw");
    raw.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  json sidecar;
  sidecar["shape"] = {n1, n2, n3};
  json spacing = json::array();
  long nn[3] = {n1, n2, n3};
  for (int axis = 0; axis < 3; ++axis)
    spacing.push_back(axis < d ? domain.side(axis) / nn[axis] : 0.0);
  sidecar["spacing"] = spacing;
  sidecar["epsilon"] = epsilon;
  sidecar["variant"] = variant;
  sidecar["parameters"] = json::parse(parameters_json);
  sidecar["order"] = "row-major, axes x1 x2 x3 (x3 fastest)";
  sidecar["volume_fraction"] = fraction;
  std::ofstream side(path_base + ".json");
  if (!side) throw InvalidArgument("write_voxels: cannot open " + path_base + ".json");
  side << sidecar.dump(2) << "\n";
  return fraction;
}

}  // namespace lphom
