#include "lphom/covering.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lphom/parallel.hpp"

namespace lphom {

namespace {

using json = nlohmann::ordered_json;

// splitmix64; used to derive per-cube random anchors independent of
// enumeration order.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double hash_uniform01(std::uint64_t seed, std::uint64_t salt) {
  return static_cast<double>(mix64(seed ^ mix64(salt)) >> 11) * 0x1.0p-53;
}

DomainBox clamped_box(const DomainBox& domain, const Vec3& corner, double side) {
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  for (int a = 0; a < domain.dim; ++a) {
    lo[a] = std::max(corner[a], domain.lower[a]);
    hi[a] = std::min(corner[a] + side, domain.upper[a]);
  }
  return DomainBox(domain.dim, lo, hi);
}

}  // namespace

int Covering::find_cube(const Vec3& x) const {
  const int d = domain.dim;
  if (!domain.contains(x, 1e-12)) return -1;
  Vec3i idx = Vec3i::Zero();
  for (int a = 0; a < d; ++a) {
    int i = static_cast<int>(std::floor(x[a] / side));
    i = std::clamp(i, imin_[a], imax_[a]);
    idx[a] = i;
  }
  long flat = 0;
  for (int a = 0; a < d; ++a) flat = flat * (imax_[a] - imin_[a] + 1) + (idx[a] - imin_[a]);
  return lookup_[static_cast<std::size_t>(flat)];
}

const CoveringCube& Covering::cube_at(const Vec3& x) const {
  int id = find_cube(x);
  if (id < 0) throw InvalidArgument("Covering: point outside the covered domain");
  return cubes[static_cast<std::size_t>(id)];
}

Covering build_covering(const DomainBox& domain, double epsilon, double r,
                        const CoveringOptions& options) {
  if (domain.dim < 1) throw InvalidArgument("build_covering: degenerate domain");
  if (!(r > 0.0) || !(r < 1.0)) throw InvalidArgument("build_covering: r must lie in (0,1)");
  if (!(epsilon > 0.0) || !(epsilon <= 1.0))
    throw InvalidArgument("build_covering: epsilon must lie in (0,1]");
  const double side = std::pow(epsilon, r);
  for (int a = 0; a < domain.dim; ++a)
    if (!(side < domain.side(a)))
      throw InvalidArgument("build_covering: eps^r must be smaller than each domain side");

  Covering cov;
  cov.domain = domain;
  cov.epsilon = epsilon;
  cov.r = r;
  cov.side = side;

  const int d = domain.dim;
  const double tol = 1e-12 * std::max(1.0, side);
  Vec3i imin = Vec3i::Zero(), imax = Vec3i::Zero();
  for (int a = 0; a < d; ++a) {
    // open lattice cube (i*side, (i+1)*side) must intersect open (lower, upper)
    imin[a] = static_cast<int>(std::floor(domain.lower[a] / side + tol));
    imax[a] = static_cast<int>(std::ceil(domain.upper[a] / side - tol)) - 1;
  }
  cov.imin_ = imin;
  cov.imax_ = imax;

  long extent = 1;
  for (int a = 0; a < d; ++a) extent *= (imax[a] - imin[a] + 1);
  cov.lookup_.assign(static_cast<std::size_t>(extent), -1);

  Vec3i idx = imin;
  for (long flat = 0; flat < extent; ++flat) {
    // decode flat -> idx (row-major over active axes)
    long rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      long ext = imax[a] - imin[a] + 1;
      idx[a] = imin[a] + static_cast<int>(rem % ext);
      rem /= ext;
    }
    CoveringCube cube;
    cube.index = Vec3i::Zero();
    for (int a = 0; a < d; ++a) cube.index[a] = idx[a];
    cube.corner = Vec3::Zero();
    for (int a = 0; a < d; ++a) cube.corner[a] = idx[a] * side;

    bool meets = true, interior = true;
    for (int a = 0; a < d; ++a) {
      if (!(cube.corner[a] < domain.upper[a] - tol && domain.lower[a] < cube.corner[a] + side - tol))
        meets = false;
      if (cube.corner[a] < domain.lower[a] - tol || cube.corner[a] + side > domain.upper[a] + tol)
        interior = false;
    }
    if (!meets) continue;
    cube.interior = interior;

    DomainBox cell = clamped_box(domain, cube.corner, side);
    switch (options.anchors) {
      case AnchorRule::center:
        cube.anchor = cell.center();
        break;
      case AnchorRule::lower_corner:
        cube.anchor = cell.lower;
        break;
      case AnchorRule::random: {
        cube.anchor = Vec3::Zero();
        for (int a = 0; a < d; ++a) {
          std::uint64_t salt = (options.layered_anchors && a == 2)
                                   ? (0xabcdef12ull ^ static_cast<std::uint64_t>(
                                                          static_cast<std::int64_t>(idx[2]) + (1ll << 40)))
                                   : mix64(static_cast<std::uint64_t>(a + 1)) ^
                                         static_cast<std::uint64_t>(flat + 1);
          cube.anchor[a] = cell.lower[a] + cell.side(a) * hash_uniform01(options.seed, salt);
        }
        break;
      }
    }

    if (options.field) {
      // lattice convention xtilde_n = D(x_n) eps k, with k the lattice point
      // nearest the cube center (any k is equivalent by periodicity).
      Mat3 dinv = options.field->Dinv(cube.anchor);
      Vec3 k = (dinv * cell.center()) / epsilon;
      for (int a = 0; a < d; ++a) k[a] = std::round(k[a]);
      for (int a = d; a < 3; ++a) k[a] = 0.0;
      cube.shift = options.field->D(cube.anchor) * (epsilon * k);
    } else {
      cube.shift = cube.corner;
    }

    cov.lookup_[static_cast<std::size_t>(flat)] = static_cast<std::int32_t>(cov.cubes.size());
    cov.cubes.push_back(cube);
  }

  cov.N_eps = static_cast<long>(cov.cubes.size());
  cov.N_tilde_eps = static_cast<long>(
      std::count_if(cov.cubes.begin(), cov.cubes.end(), [](const CoveringCube& c) { return c.interior; }));
  cov.remainder_measure = domain.volume() - static_cast<double>(cov.N_tilde_eps) * std::pow(side, d);
  if (cov.remainder_measure < 0.0 && cov.remainder_measure > -1e-12) cov.remainder_measure = 0.0;
  return cov;
}

namespace {

// Separating-axis test between an axis-aligned box and a parallelepiped,
// both closed; touching counts as intersecting.
struct Polytope {
  std::vector<Vec3> vertices;
};

void project(const Polytope& p, const Vec3& axis, double& lo, double& hi) {
  lo = hi = p.vertices[0].dot(axis);
  for (std::size_t i = 1; i < p.vertices.size(); ++i) {
    double t = p.vertices[i].dot(axis);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
}

bool sat_intersects(const Polytope& a, const Polytope& b, const std::vector<Vec3>& axes,
                    double tol) {
  for (const Vec3& axis : axes) {
    if (axis.squaredNorm() < 1e-24) continue;
    double alo, ahi, blo, bhi;
    project(a, axis, alo, ahi);
    project(b, axis, blo, bhi);
    if (ahi < blo - tol || bhi < alo - tol) return false;
  }
  return true;
}

}  // namespace

CellCovering build_cell_covering(const Covering& covering, int cube_index,
                                 const TransformationField& D) {
  if (cube_index < 0 || cube_index >= static_cast<int>(covering.cubes.size()))
    throw InvalidArgument("build_cell_covering: no such cube");
  const CoveringCube& cube = covering.cubes[static_cast<std::size_t>(cube_index)];
  const int d = covering.domain.dim;
  const double eps = covering.epsilon;
  const double side = covering.side;

  Mat3 Dn = D.D(cube.anchor);
  double det = 1.0;
  {
    // determinant of the active block
    Eigen::MatrixXd blk = Dn.topLeftCorner(d, d);
    det = std::abs(blk.determinant());
  }
  if (!(det > 1e-14)) throw InvalidArgument("build_cell_covering: singular transformation");

  // cube as polytope
  Polytope box;
  for (int v = 0; v < (1 << d); ++v) {
    Vec3 p = cube.corner;
    for (int a = 0; a < d; ++a)
      if (v & (1 << a)) p[a] += side;
    box.vertices.push_back(p);
  }

  // candidate lattice range: map box corners through Dinv((q - shift)/eps)
  Mat3 Dninv = D.Dinv(cube.anchor);
  Vec3 klo = Vec3::Constant(1e300), khi = Vec3::Constant(-1e300);
  for (const Vec3& q : box.vertices) {
    Vec3 y = Dninv * (q - cube.shift) / eps;
    klo = klo.cwiseMin(y);
    khi = khi.cwiseMax(y);
  }
  Vec3i lo = Vec3i::Zero(), hi = Vec3i::Zero();
  for (int a = 0; a < d; ++a) {
    lo[a] = static_cast<int>(std::floor(klo[a])) - 1;
    hi[a] = static_cast<int>(std::ceil(khi[a])) + 1;
  }

  // SAT axes
  std::vector<Vec3> axes;
  for (int a = 0; a < d; ++a) axes.push_back(Vec3::Unit(a));
  std::vector<Vec3> edges;
  for (int a = 0; a < d; ++a) edges.push_back(eps * Dn.col(a));
  if (d == 2) {
    for (const Vec3& e : edges) axes.emplace_back(-e[1], e[0], 0.0);
  } else if (d == 3) {
    axes.push_back(edges[1].cross(edges[2]));
    axes.push_back(edges[2].cross(edges[0]));
    axes.push_back(edges[0].cross(edges[1]));
    for (int a = 0; a < 3; ++a)
      for (const Vec3& e : edges) axes.push_back(Vec3::Unit(a).cross(e));
  }

  const double tol = 1e-12 * std::max(1.0, side);
  CellCovering cc;
  cc.cube_index = cube_index;
  cc.cell_measure = std::pow(eps, d) * det;

  Vec3i k = lo;
  for (;;) {
    Polytope cell;
    Vec3 base = Vec3::Zero();
    for (int a = 0; a < d; ++a) base[a] = static_cast<double>(k[a]);
    for (int v = 0; v < (1 << d); ++v) {
      Vec3 y = base;
      for (int a = 0; a < d; ++a)
        if (v & (1 << a)) y[a] += 1.0;
      cell.vertices.push_back(cube.shift + eps * (Dn * y));
    }
    bool enclosed = true;
    for (const Vec3& p : cell.vertices) {
      for (int a = 0; a < d; ++a) {
        if (p[a] < cube.corner[a] - tol || p[a] > cube.corner[a] + side + tol) {
          enclosed = false;
          break;
        }
      }
      if (!enclosed) break;
    }
    if (enclosed) {
      ++cc.I_tilde_n_eps;
      ++cc.I_n_eps;
    } else if (sat_intersects(box, cell, axes, tol)) {
      ++cc.I_n_eps;
    }

    int a = 0;
    for (; a < d; ++a) {
      if (++k[a] <= hi[a]) break;
      k[a] = lo[a];
    }
    if (a == d) break;
  }

  cc.boundary_band_measure =
      std::pow(side, d) - static_cast<double>(cc.I_tilde_n_eps) * cc.cell_measure;
  if (cc.boundary_band_measure < 0.0 && cc.boundary_band_measure > -1e-10)
    cc.boundary_band_measure = 0.0;
  return cc;
}

MollifiedCutoff::MollifiedCutoff(const Covering& covering, double rho) : covering_(&covering) {
  if (!(rho > covering.r) || !(rho < 1.0))
    throw InvalidArgument("MollifiedCutoff: rho must lie in (r, 1)");
  rho_ = rho;
  eps_rho_ = std::pow(covering.epsilon, rho);
  if (!(eps_rho_ < 0.5 * covering.side))
    throw InvalidArgument("MollifiedCutoff: eps^rho must be below half the cube side");

  const int d = covering.domain.dim;
  auto bump = [](double u2) { return u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0; };

  // normalization constant of the bump on the unit ball, by midpoint
  // quadrature refined to relative 1e-10
  double c_ref = 0.0;
  {
    double prev = -1.0;
    for (int m = 64; m <= 4096; m *= 2) {
      if (d == 3 && m > 256) break;
      double h = 2.0 / m, sum = 0.0;
      long mm = m;
      long total = 1;
      for (int a = 0; a < d; ++a) total *= mm;
      sum = parallel_reduce(total, [&](std::int64_t flat) {
        long rem = flat;
        double u2 = 0.0;
        for (int a = 0; a < d; ++a) {
          long i = rem % mm;
          rem /= mm;
          double z = -1.0 + (i + 0.5) * h;
          u2 += z * z;
        }
        return bump(u2);
      });
      sum *= std::pow(h, d);
      if (prev > 0.0 && std::abs(sum - prev) <= 1e-10 * sum) {
        c_ref = sum;
        break;
      }
      prev = sum;
      c_ref = sum;
    }
  }

  const int m = (d == 3) ? 14 : 22;
  const double h = 2.0 / m;
  double wsum = 0.0;
  Vec3i iv = Vec3i::Zero();
  for (;;) {
    Vec3 z = Vec3::Zero();
    for (int a = 0; a < d; ++a) z[a] = -1.0 + (iv[a] + 0.5) * h;
    double u2 = z.squaredNorm();
    if (u2 < 1.0) {
      Node node;
      node.z = z;
      double f = bump(u2);
      node.w = f * std::pow(h, d);
      double om = 1.0 - u2;
      double hp = -1.0 / (om * om);            // h'(u), h(u) = -1/(1-u)
      double hpp = -2.0 / (om * om * om);       // h''(u)
      node.gw = f * hp * 2.0 * z * std::pow(h, d);
      node.hw = (f * (4.0 * (hp * hp + hpp)) * (z * z.transpose()) +
                 f * 2.0 * hp * Mat3::Identity()) *
                std::pow(h, d);
      nodes_.push_back(node);
      wsum += node.w;
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++iv[a] < m) break;
      iv[a] = 0;
    }
    if (a == d) break;
  }
  // the node set must reproduce the reference constant reasonably well,
  // then weights are renormalized so the plateau value is exactly 1
  if (std::abs(wsum - c_ref) > 5e-2 * c_ref)
    throw SolverError("MollifiedCutoff: mollifier quadrature inconsistent with reference constant");
  for (Node& node : nodes_) {
    node.w /= wsum;
    node.gw /= wsum;
    node.hw /= wsum;
  }
}

bool MollifiedCutoff::in_shrunk_cube(const Vec3& x, const CoveringCube& cube) const {
  const int d = covering_->domain.dim;
  for (int a = 0; a < d; ++a) {
    if (x[a] <= cube.corner[a] + eps_rho_ || x[a] >= cube.corner[a] + covering_->side - eps_rho_)
      return false;
  }
  return true;
}

double MollifiedCutoff::value(const Vec3& x) const {
  int id = covering_->find_cube(x);
  return id < 0 ? 0.0 : value(x, id);
}

double MollifiedCutoff::value(const Vec3& x, int cube_index) const {
  const CoveringCube& cube = covering_->cubes[static_cast<std::size_t>(cube_index)];
  if (!cube.interior) return 0.0;
  double acc = 0.0;
  for (const Node& node : nodes_) {
    if (in_shrunk_cube(x - eps_rho_ * node.z, cube)) acc += node.w;
  }
  return acc;
}

Vec3 MollifiedCutoff::gradient(const Vec3& x) const {
  int id = covering_->find_cube(x);
  if (id < 0) return Vec3::Zero();
  const CoveringCube& cube = covering_->cubes[static_cast<std::size_t>(id)];
  if (!cube.interior) return Vec3::Zero();
  Vec3 acc = Vec3::Zero();
  for (const Node& node : nodes_) {
    if (in_shrunk_cube(x - eps_rho_ * node.z, cube)) acc += node.gw;
  }
  return acc / eps_rho_;
}

double MollifiedCutoff::hessian_norm(const Vec3& x) const {
  int id = covering_->find_cube(x);
  if (id < 0) return 0.0;
  const CoveringCube& cube = covering_->cubes[static_cast<std::size_t>(id)];
  if (!cube.interior) return 0.0;
  Mat3 acc = Mat3::Zero();
  for (const Node& node : nodes_) {
    if (in_shrunk_cube(x - eps_rho_ * node.z, cube)) acc += node.hw;
  }
  return acc.norm() / (eps_rho_ * eps_rho_);
}

double MollifiedCutoff::l2_distance_to_indicators(int points_per_axis) const {
  const DomainBox& dom = covering_->domain;
  const int d = dom.dim;
  long n = points_per_axis;
  long total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  double cellw = dom.volume() / static_cast<double>(total);
  double sum = parallel_reduce(total, [&](std::int64_t flat) {
    long rem = flat;
    Vec3 x = Vec3::Zero();
    for (int a = 0; a < d; ++a) {
      long i = rem % n;
      rem /= n;
      x[a] = dom.lower[a] + dom.side(a) * (i + 0.5) / static_cast<double>(n);
    }
    int id = covering_->find_cube(x);
    double phi = id < 0 ? 0.0 : value(x, id);
    return (1.0 - phi) * (1.0 - phi);
  });
  return std::sqrt(sum * cellw);
}

std::string Covering::to_json() const {
  json j;
  j["epsilon"] = epsilon;
  j["r"] = r;
  j["side"] = side;
  j["dim"] = domain.dim;
  j["domain"] = {{"lower", {domain.lower[0], domain.lower[1], domain.lower[2]}},
                 {"upper", {domain.upper[0], domain.upper[1], domain.upper[2]}}};
  j["N_eps"] = N_eps;
  j["N_tilde_eps"] = N_tilde_eps;
  j["remainder_measure"] = remainder_measure;
  json cl = json::array();
  for (const CoveringCube& c : cubes) {
    json jc;
    jc["index"] = {c.index[0], c.index[1], c.index[2]};
    jc["corner"] = {c.corner[0], c.corner[1], c.corner[2]};
    jc["anchor"] = {c.anchor[0], c.anchor[1], c.anchor[2]};
    jc["shift"] = {c.shift[0], c.shift[1], c.shift[2]};
    jc["interior"] = c.interior;
    cl.push_back(jc);
  }
  j["cubes"] = cl;
  return j.dump(2);
}

Covering Covering::from_json(const std::string& text) {
  json j = json::parse(text);
  Covering cov;
  int dim = j.at("dim").get<int>();
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  for (int a = 0; a < 3; ++a) {
    lo[a] = j.at("domain").at("lower").at(a).get<double>();
    hi[a] = j.at("domain").at("upper").at(a).get<double>();
  }
  cov.domain = DomainBox(dim, lo, hi);
  cov.epsilon = j.at("epsilon").get<double>();
  cov.r = j.at("r").get<double>();
  cov.side = j.at("side").get<double>();
  cov.N_eps = j.at("N_eps").get<long>();
  cov.N_tilde_eps = j.at("N_tilde_eps").get<long>();
  cov.remainder_measure = j.at("remainder_measure").get<double>();
  Vec3i imin = Vec3i::Constant(INT32_MAX), imax = Vec3i::Constant(INT32_MIN);
  for (const auto& jc : j.at("cubes")) {
    CoveringCube c;
    for (int a = 0; a < 3; ++a) {
      c.index[a] = jc.at("index").at(a).get<int>();
      c.corner[a] = jc.at("corner").at(a).get<double>();
      c.anchor[a] = jc.at("anchor").at(a).get<double>();
      c.shift[a] = jc.at("shift").at(a).get<double>();
    }
    c.interior = jc.at("interior").get<bool>();
    cov.cubes.push_back(c);
    imin = imin.cwiseMin(c.index);
    imax = imax.cwiseMax(c.index);
  }
  for (int a = dim; a < 3; ++a) {
    imin[a] = 0;
    imax[a] = 0;
  }
  cov.imin_ = imin;
  cov.imax_ = imax;
  long extent = 1;
  for (int a = 0; a < dim; ++a) extent *= (imax[a] - imin[a] + 1);
  cov.lookup_.assign(static_cast<std::size_t>(extent), -1);
  for (std::size_t i = 0; i < cov.cubes.size(); ++i) {
    long flat = 0;
    for (int a = 0; a < dim; ++a)
      flat = flat * (imax[a] - imin[a] + 1) + (cov.cubes[i].index[a] - imin[a]);
    cov.lookup_[static_cast<std::size_t>(flat)] = static_cast<std::int32_t>(i);
  }
  return cov;
}

}  // namespace lphom
