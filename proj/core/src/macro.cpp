#include "lphom/macro.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lphom/parallel.hpp"
#include "lphom/sparse.hpp"

namespace lphom {

namespace {

using json = nlohmann::ordered_json;

constexpr double kG0 = 0.5 - 0.5 / 1.7320508075688772;
constexpr double kG1 = 0.5 + 0.5 / 1.7320508075688772;

struct Shape {
  // values and reference gradients of the 2^d multilinear shapes at a point
  std::array<double, 8> N{};
  std::array<Vec3, 8> G{};
};

Shape shape_at(int dim, const Vec3& t) {
  Shape s;
  int nl = 1 << dim;
  for (int l = 0; l < nl; ++l) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= (l >> a) & 1 ? t[a] : 1.0 - t[a];
    s.N[static_cast<std::size_t>(l)] = v;
    Vec3 g = Vec3::Zero();
    for (int a = 0; a < dim; ++a) {
      double d = 1.0;
      for (int b = 0; b < dim; ++b) {
        if (b == a)
          d *= (l >> b) & 1 ? 1.0 : -1.0;
        else
          d *= (l >> b) & 1 ? t[b] : 1.0 - t[b];
      }
      g[a] = d;
    }
    s.G[static_cast<std::size_t>(l)] = g;
  }
  return s;
}

std::vector<Vec3> gauss_points(int dim) {
  std::vector<Vec3> pts;
  int nq = 1 << dim;
  for (int q = 0; q < nq; ++q) {
    Vec3 t = Vec3::Zero();
    for (int a = 0; a < dim; ++a) t[a] = (q >> a) & 1 ? kG1 : kG0;
    pts.push_back(t);
  }
  return pts;
}

}  // namespace

MacroMesh MacroMesh::structured(const DomainBox& box, const Vec3i& cells) {
  MacroMesh m;
  m.box = box;
  m.cells = cells;
  for (int a = 0; a < box.dim; ++a)
    if (cells[a] < 1) throw InvalidArgument("MacroMesh: needs at least one element per axis");
  for (int a = box.dim; a < 3; ++a) m.cells[a] = 0;
  return m;
}

long MacroMesh::node_count() const {
  long n = 1;
  for (int a = 0; a < box.dim; ++a) n *= (cells[a] + 1);
  return n;
}

long MacroMesh::element_count() const {
  long n = 1;
  for (int a = 0; a < box.dim; ++a) n *= cells[a];
  return n;
}

Vec3 MacroMesh::node(long id) const {
  Vec3 x = Vec3::Zero();
  long rem = id;
  for (int a = 0; a < box.dim; ++a) {
    long n = cells[a] + 1;
    long i = rem % n;
    rem /= n;
    x[a] = box.lower[a] + h(a) * static_cast<double>(i);
  }
  return x;
}

bool MacroMesh::boundary_node(long id) const {
  long rem = id;
  for (int a = 0; a < box.dim; ++a) {
    long n = cells[a] + 1;
    long i = rem % n;
    rem /= n;
    if (i == 0 || i == n - 1) return true;
  }
  return false;
}

namespace {

// element -> global node ids, local index bit a = offset along axis a
void element_nodes(const MacroMesh& m, long elem, std::array<long, 8>& nodes, Vec3& lower) {
  const int d = m.box.dim;
  long rem = elem;
  long idx[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    idx[a] = rem % m.cells[a];
    rem /= m.cells[a];
  }
  for (int a = 0; a < 3; ++a) lower[a] = 0.0;
  for (int a = 0; a < d; ++a) lower[a] = m.box.lower[a] + m.h(a) * static_cast<double>(idx[a]);
  int nl = 1 << d;
  for (int l = 0; l < nl; ++l) {
    long id = 0;
    for (int a = d - 1; a >= 0; --a) {
      long i = idx[a] + ((l >> a) & 1);
      id = id * (m.cells[a] + 1) + i;
    }
    nodes[static_cast<std::size_t>(l)] = id;
  }
}

struct DirichletSystem {
  std::vector<long> free_index;  // dof -> free slot or -1
  std::vector<long> free_dofs;
  std::vector<double> fixed_values;  // full-length, valid at fixed dofs
};

DirichletSystem dirichlet_split(const MacroMesh& mesh, int comps,
                                const std::function<Vec3(const Vec3&)>& g_vec,
                                const std::function<double(const Vec3&)>& g_sca) {
  DirichletSystem sys;
  long nn = mesh.node_count();
  sys.free_index.assign(static_cast<std::size_t>(nn * comps), -1);
  sys.fixed_values.assign(static_cast<std::size_t>(nn * comps), 0.0);
  for (long node = 0; node < nn; ++node) {
    bool bnd = mesh.boundary_node(node);
    for (int c = 0; c < comps; ++c) {
      long dof = node * comps + c;
      if (bnd) {
        Vec3 x = mesh.node(node);
        sys.fixed_values[static_cast<std::size_t>(dof)] =
            comps == 1 ? g_sca(x) : g_vec(x)[c];
      } else {
        sys.free_index[static_cast<std::size_t>(dof)] = static_cast<long>(sys.free_dofs.size());
        sys.free_dofs.push_back(dof);
      }
    }
  }
  return sys;
}

struct AssembledSolve {
  std::vector<double> values;  // full solution
  double residual = 0.0;
};

// generic constrained solve from per-element dense matrices and load vectors
AssembledSolve constrained_solve(const MacroMesh& mesh, int comps,
                                 const std::function<const Eigen::MatrixXd&(long)>& Ke,
                                 const std::function<void(long, Eigen::VectorXd&)>& fe,
                                 const DirichletSystem& sys, double rel_tol) {
  const int d = mesh.box.dim;
  const int nl = 1 << d;
  const int ldofs = nl * comps;
  long nfree = static_cast<long>(sys.free_dofs.size());
  std::vector<double> rhs(static_cast<std::size_t>(nfree), 0.0);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * ldofs * ldofs / 2);

  std::array<long, 8> nodes{};
  Vec3 lower;
  Eigen::VectorXd floc(ldofs);
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    const Eigen::MatrixXd& K = Ke(e);
    floc.setZero();
    fe(e, floc);
    for (int a = 0; a < nl; ++a) {
      for (int ca = 0; ca < comps; ++ca) {
        long ga = nodes[static_cast<std::size_t>(a)] * comps + ca;
        long fa = sys.free_index[static_cast<std::size_t>(ga)];
        if (fa < 0) continue;
        rhs[static_cast<std::size_t>(fa)] += floc(a * comps + ca);
        for (int b = 0; b < nl; ++b) {
          for (int cb = 0; cb < comps; ++cb) {
            long gb = nodes[static_cast<std::size_t>(b)] * comps + cb;
            long fb = sys.free_index[static_cast<std::size_t>(gb)];
            double v = K(a * comps + ca, b * comps + cb);
            if (fb >= 0)
              trip.push_back({fa, fb, v});
            else
              rhs[static_cast<std::size_t>(fa)] -= v * sys.fixed_values[static_cast<std::size_t>(gb)];
          }
        }
      }
    }
  }
  CsrMatrix K = CsrMatrix::from_triplets(nfree, std::move(trip));
  std::vector<double> x(static_cast<std::size_t>(nfree), 0.0);
  CgOptions opts;
  opts.rel_tol = rel_tol;
  opts.max_iterations = 200l * static_cast<long>(std::sqrt(static_cast<double>(nfree)) + 1) + 2000;
  CgResult res = cg_solve(K, rhs, x, opts);

  AssembledSolve out;
  out.values = sys.fixed_values;
  for (long f = 0; f < nfree; ++f)
    out.values[static_cast<std::size_t>(sys.free_dofs[static_cast<std::size_t>(f)])] =
        x[static_cast<std::size_t>(f)];
  out.residual = res.rel_residual;
  return out;
}

}  // namespace

MacroSolution solve_macro_elastic(const HomogenizedTensorField& Ahom, const BoundaryData& bc,
                                  const MacroMesh& mesh, double rel_tol) {
  if (mesh.box.dim != 3) throw InvalidArgument("solve_macro_elastic: 3D mesh required");
  if (Ahom.samples.empty()) throw InvalidArgument("solve_macro_elastic: empty tensor field");
  if (Ahom.samples.size() > 1) {
    if (Ahom.samples.front().coordinate > mesh.box.lower[2] + 1e-12 ||
        Ahom.samples.back().coordinate < mesh.box.upper[2] - 1e-12)
      throw InvalidArgument("solve_macro_elastic: A^hom samples do not cover the mesh x3 range");
  }

  const int d = 3, comps = 3, nl = 8, ldofs = 24;
  auto qpts = gauss_points(d);
  double vol = mesh.h(0) * mesh.h(1) * mesh.h(2);
  double qw = vol / static_cast<double>(qpts.size());

  // strain-displacement (Mandel) per quadrature point; uniform geometry
  std::vector<Eigen::Matrix<double, 6, 24>> B;
  constexpr int pair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  const double s2 = std::sqrt(2.0);
  for (const Vec3& t : qpts) {
    Shape s = shape_at(d, t);
    Eigen::Matrix<double, 6, 24> Bq = Eigen::Matrix<double, 6, 24>::Zero();
    for (int a = 0; a < nl; ++a) {
      Vec3 g;
      for (int ax = 0; ax < 3; ++ax) g[ax] = s.G[static_cast<std::size_t>(a)][ax] / mesh.h(ax);
      for (int c = 0; c < comps; ++c)
        for (int K6 = 0; K6 < 6; ++K6) {
          int k = pair[K6][0], l = pair[K6][1];
          double e = 0.5 * ((c == k ? g[l] : 0.0) + (c == l ? g[k] : 0.0));
          Bq(K6, a * comps + c) = (K6 >= 3 ? s2 : 1.0) * e;
        }
    }
    B.push_back(Bq);
  }

  // per-z-layer element matrices (centroid tensor is layer-constant)
  std::vector<Eigen::MatrixXd> Klayer;
  for (long k = 0; k < mesh.cells[2]; ++k) {
    double cz = mesh.box.lower[2] + mesh.h(2) * (static_cast<double>(k) + 0.5);
    Mat6 M = Ahom.at(cz).mandel();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ldofs, ldofs);
    for (const auto& Bq : B) K += qw * (Bq.transpose() * M * Bq);
    Klayer.push_back(K);
  }
  long per_layer = mesh.cells[0] * mesh.cells[1];
  auto Ke = [&](long e) -> const Eigen::MatrixXd& {
    return Klayer[static_cast<std::size_t>(e / per_layer)];
  };

  std::vector<Shape> shapes;
  for (const Vec3& t : qpts) shapes.push_back(shape_at(d, t));
  auto fe = [&](long e, Eigen::VectorXd& f) {
    std::array<long, 8> nodes{};
    Vec3 lower;
    element_nodes(mesh, e, nodes, lower);
    for (std::size_t q = 0; q < qpts.size(); ++q) {
      Vec3 x = lower;
      for (int ax = 0; ax < 3; ++ax) x[ax] += mesh.h(ax) * qpts[q][ax];
      Vec3 G = bc.load(x);
      for (int a = 0; a < nl; ++a)
        for (int c = 0; c < comps; ++c)
          f(a * comps + c) += qw * shapes[q].N[static_cast<std::size_t>(a)] * G[c];
    }
  };

  DirichletSystem sys = dirichlet_split(mesh, comps, bc.displacement, {});
  AssembledSolve solved = constrained_solve(mesh, comps, Ke, fe, sys, rel_tol);

  MacroSolution sol;
  sol.mesh = mesh;
  sol.components = comps;
  sol.values = std::move(solved.values);
  sol.residual = solved.residual;
  sol.energy = elastic_energy(Ahom, bc, mesh, sol.values);
  return sol;
}

double elastic_energy(const HomogenizedTensorField& Ahom, const BoundaryData& bc,
                      const MacroMesh& mesh, std::span<const double> nodal_values) {
  const int d = 3, comps = 3, nl = 8;
  auto qpts = gauss_points(d);
  double qw = mesh.h(0) * mesh.h(1) * mesh.h(2) / static_cast<double>(qpts.size());
  std::vector<Shape> shapes;
  for (const Vec3& t : qpts) shapes.push_back(shape_at(d, t));
  constexpr int pair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  const double s2 = std::sqrt(2.0);
  std::vector<Eigen::Matrix<double, 6, 24>> B;
  for (const Vec3& t : qpts) {
    Shape s = shape_at(d, t);
    Eigen::Matrix<double, 6, 24> Bq = Eigen::Matrix<double, 6, 24>::Zero();
    for (int a = 0; a < nl; ++a) {
      Vec3 g;
      for (int ax = 0; ax < 3; ++ax) g[ax] = s.G[static_cast<std::size_t>(a)][ax] / mesh.h(ax);
      for (int c = 0; c < comps; ++c)
        for (int K6 = 0; K6 < 6; ++K6) {
          int k = pair[K6][0], l = pair[K6][1];
          double e = 0.5 * ((c == k ? g[l] : 0.0) + (c == l ? g[k] : 0.0));
          Bq(K6, a * comps + c) = (K6 >= 3 ? s2 : 1.0) * e;
        }
    }
    B.push_back(Bq);
  }

  double energy = 0.0;
  std::array<long, 8> nodes{};
  Vec3 lower;
  Eigen::VectorXd ue(nl * comps);
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    double cz = lower[2] + 0.5 * mesh.h(2);
    Mat6 M = Ahom.at(cz).mandel();
    for (int a = 0; a < nl; ++a)
      for (int c = 0; c < comps; ++c)
        ue(a * comps + c) =
            nodal_values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]) * comps + c];
    for (std::size_t q = 0; q < qpts.size(); ++q) {
      Vec6 strain = B[q] * ue;
      energy += 0.5 * qw * strain.dot(M * strain);
      Vec3 x = lower;
      for (int ax = 0; ax < 3; ++ax) x[ax] += mesh.h(ax) * qpts[q][ax];
      Vec3 G = bc.load(x);
      double uval[3] = {0, 0, 0};
      for (int a = 0; a < nl; ++a)
        for (int c = 0; c < comps; ++c)
          uval[c] += shapes[q].N[static_cast<std::size_t>(a)] * ue(a * comps + c);
      energy -= qw * (G[0] * uval[0] + G[1] * uval[1] + G[2] * uval[2]);
    }
  }
  return energy;
}

namespace {

MacroSolution scalar_solve_impl(const std::function<Eigen::Matrix2d(const Vec3&)>& coeff,
                                const ScalarBoundaryData& bc, const MacroMesh& mesh,
                                double rel_tol) {
  if (mesh.box.dim != 2) throw InvalidArgument("scalar macro solve: 2D mesh required");
  const int d = 2, nl = 4;
  auto qpts = gauss_points(d);
  double vol = mesh.h(0) * mesh.h(1);
  double qw = vol / static_cast<double>(qpts.size());

  std::vector<Shape> shapes;
  for (const Vec3& t : qpts) shapes.push_back(shape_at(d, t));

  // per-element matrices from the centroid coefficient; elements are
  // independent (per-element scratch), the triplet merge below stays ordered
  std::vector<Eigen::Matrix<double, 4, 2>> Gq(qpts.size());
  for (std::size_t q = 0; q < qpts.size(); ++q)
    for (int a = 0; a < nl; ++a)
      for (int ax = 0; ax < 2; ++ax)
        Gq[q](a, ax) = shapes[q].G[static_cast<std::size_t>(a)][ax] / mesh.h(ax);
  std::vector<Eigen::MatrixXd> Kel(static_cast<std::size_t>(mesh.element_count()));
  parallel_for(mesh.element_count(), [&](std::int64_t e) {
    std::array<long, 8> nds{};
    Vec3 lo;
    element_nodes(mesh, e, nds, lo);
    Vec3 c = lo;
    c[0] += 0.5 * mesh.h(0);
    c[1] += 0.5 * mesh.h(1);
    Eigen::Matrix2d A = coeff(c);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nl, nl);
    for (std::size_t q = 0; q < qpts.size(); ++q) K += qw * (Gq[q] * A * Gq[q].transpose());
    Kel[static_cast<std::size_t>(e)] = K;
  });
  std::array<long, 8> nodes{};
  Vec3 lower;
  auto Ke = [&](long e) -> const Eigen::MatrixXd& { return Kel[static_cast<std::size_t>(e)]; };
  auto fe = [&](long e, Eigen::VectorXd& f) {
    std::array<long, 8> nds{};
    Vec3 lo;
    element_nodes(mesh, e, nds, lo);
    for (std::size_t q = 0; q < qpts.size(); ++q) {
      Vec3 x = lo;
      x[0] += mesh.h(0) * qpts[q][0];
      x[1] += mesh.h(1) * qpts[q][1];
      double G = bc.load(x);
      for (int a = 0; a < nl; ++a) f(a) += qw * shapes[q].N[static_cast<std::size_t>(a)] * G;
    }
  };

  DirichletSystem sys = dirichlet_split(mesh, 1, {}, bc.value);
  AssembledSolve solved = constrained_solve(mesh, 1, Ke, fe, sys, rel_tol);

  MacroSolution sol;
  sol.mesh = mesh;
  sol.components = 1;
  sol.values = std::move(solved.values);
  sol.residual = solved.residual;

  double energy = 0.0;
  Eigen::VectorXd ue(nl);
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    for (int a = 0; a < nl; ++a) ue(a) = sol.values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
    energy += 0.5 * ue.dot(Kel[static_cast<std::size_t>(e)] * ue);
    for (std::size_t q = 0; q < qpts.size(); ++q) {
      Vec3 x = lower;
      x[0] += mesh.h(0) * qpts[q][0];
      x[1] += mesh.h(1) * qpts[q][1];
      double uval = 0.0;
      for (int a = 0; a < nl; ++a) uval += shapes[q].N[static_cast<std::size_t>(a)] * ue(a);
      energy -= qw * bc.load(x) * uval;
    }
  }
  sol.energy = energy;
  return sol;
}

}  // namespace

double scalar_energy(const std::function<Eigen::Matrix2d(const Vec3&)>& coeff,
                     const ScalarBoundaryData& bc, const MacroMesh& mesh,
                     std::span<const double> nodal_values) {
  const int d = 2, nl = 4;
  auto qpts = gauss_points(d);
  double qw = mesh.h(0) * mesh.h(1) / static_cast<double>(qpts.size());
  std::vector<Shape> shapes;
  for (const Vec3& t : qpts) shapes.push_back(shape_at(d, t));

  double energy = 0.0;
  std::array<long, 8> nodes{};
  Vec3 lower;
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    Vec3 c = lower;
    c[0] += 0.5 * mesh.h(0);
    c[1] += 0.5 * mesh.h(1);
    Eigen::Matrix2d A = coeff(c);
    for (std::size_t q = 0; q < qpts.size(); ++q) {
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      double uval = 0.0;
      for (int a = 0; a < nl; ++a) {
        double v = nodal_values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
        for (int ax = 0; ax < 2; ++ax)
          grad[ax] += shapes[q].G[static_cast<std::size_t>(a)][ax] / mesh.h(ax) * v;
        uval += shapes[q].N[static_cast<std::size_t>(a)] * v;
      }
      Vec3 x = lower;
      x[0] += mesh.h(0) * qpts[q][0];
      x[1] += mesh.h(1) * qpts[q][1];
      energy += 0.5 * qw * grad.dot(A * grad) - qw * bc.load(x) * uval;
    }
  }
  return energy;
}

MacroSolution solve_macro_scalar(const std::function<Eigen::Matrix2d(const Vec3&)>& coeff,
                                 const ScalarBoundaryData& bc, const MacroMesh& mesh,
                                 double rel_tol) {
  return scalar_solve_impl(coeff, bc, mesh, rel_tol);
}

MacroSolution solve_direct_micro_scalar(const std::function<double(const Vec3&)>& coeff,
                                        double epsilon, const ScalarBoundaryData& bc,
                                        const MacroMesh& mesh, double rel_tol) {
  for (int a = 0; a < mesh.box.dim; ++a) {
    if (epsilon / mesh.h(a) < 8.0 - 1e-9)
      throw ResolutionError(
          "solve_direct_micro_scalar: mesh must carry >= 8 elements per period",
          static_cast<long>(std::ceil(8.0 * mesh.box.side(a) / epsilon)));
  }
  auto matrix_coeff = [coeff](const Vec3& x) {
    return (coeff(x) * Eigen::Matrix2d::Identity()).eval();
  };
  return scalar_solve_impl(matrix_coeff, bc, mesh, rel_tol);
}

CentroidGradients centroid_gradients(const MacroSolution& u) {
  const MacroMesh& mesh = u.mesh;
  const int d = mesh.box.dim;
  const int nl = 1 << d;
  CentroidGradients out;
  out.mesh = mesh;
  out.components = u.components;
  out.grads.assign(static_cast<std::size_t>(mesh.element_count()) * u.components * 3, 0.0);
  Shape s = shape_at(d, Vec3::Constant(0.5));
  std::array<long, 8> nodes{};
  Vec3 lower;
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    for (int c = 0; c < u.components; ++c)
      for (int ax = 0; ax < d; ++ax) {
        double g = 0.0;
        for (int a = 0; a < nl; ++a)
          g += s.G[static_cast<std::size_t>(a)][ax] / mesh.h(ax) *
               u.value(nodes[static_cast<std::size_t>(a)], c);
        out.grads[(static_cast<std::size_t>(e) * u.components + c) * 3 + ax] = g;
      }
  }
  return out;
}

namespace {

template <typename Ref>
double l2_error_impl(const MacroSolution& u, const Ref& ref, int comps) {
  const MacroMesh& mesh = u.mesh;
  const int d = mesh.box.dim;
  const int nl = 1 << d;
  auto qpts = gauss_points(d);
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= mesh.h(a);
  double qw = vol / static_cast<double>(qpts.size());
  std::vector<Shape> shapes;
  for (const Vec3& t : qpts) shapes.push_back(shape_at(d, t));

  double acc = 0.0;
  std::array<long, 8> nodes{};
  Vec3 lower;
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    for (std::size_t q = 0; q < qpts.size(); ++q) {
      Vec3 x = lower;
      for (int ax = 0; ax < d; ++ax) x[ax] += mesh.h(ax) * qpts[q][ax];
      for (int c = 0; c < comps; ++c) {
        double uh = 0.0;
        for (int a = 0; a < nl; ++a)
          uh += shapes[q].N[static_cast<std::size_t>(a)] *
                u.value(nodes[static_cast<std::size_t>(a)], c);
        double diff = uh - ref(x, c);
        acc += qw * diff * diff;
      }
    }
  }
  return std::sqrt(acc);
}

}  // namespace

double l2_error(const MacroSolution& u, const std::function<Vec3(const Vec3&)>& ref) {
  return l2_error_impl(u, [&](const Vec3& x, int c) { return ref(x)[c]; }, u.components);
}

double l2_error_scalar(const MacroSolution& u, const std::function<double(const Vec3&)>& ref) {
  return l2_error_impl(u, [&](const Vec3& x, int) { return ref(x); }, 1);
}

double h1_seminorm_scalar(const MacroSolution& u) {
  CentroidGradients g = centroid_gradients(u);
  const MacroMesh& mesh = u.mesh;
  double vol = 1.0;
  for (int a = 0; a < mesh.box.dim; ++a) vol *= mesh.h(a);
  double acc = 0.0;
  for (long e = 0; e < mesh.element_count(); ++e)
    for (int ax = 0; ax < mesh.box.dim; ++ax) acc += vol * g.grad(e, 0, ax) * g.grad(e, 0, ax);
  return std::sqrt(acc);
}

double l2_norm_scalar(const MacroSolution& u) {
  return l2_error_scalar(u, [](const Vec3&) { return 0.0; });
}

double scalar_flux(const MacroSolution& u,
                   const std::function<Eigen::Matrix2d(const Vec3&)>& coeff, int axis,
                   double plane) {
  const MacroMesh& mesh = u.mesh;
  if (mesh.box.dim != 2) throw InvalidArgument("scalar_flux: 2D solution required");
  CentroidGradients g = centroid_gradients(u);
  long layer = static_cast<long>(
      std::clamp((plane - mesh.box.lower[axis]) / mesh.h(axis), 0.0,
                 static_cast<double>(mesh.cells[axis] - 1)));
  int other = 1 - axis;
  double acc = 0.0;
  std::array<long, 8> nodes{};
  Vec3 lower;
  for (long e = 0; e < mesh.element_count(); ++e) {
    element_nodes(mesh, e, nodes, lower);
    long idx_axis = axis == 0 ? (e % mesh.cells[0]) : (e / mesh.cells[0]);
    if (idx_axis != layer) continue;
    Vec3 c = lower;
    c[0] += 0.5 * mesh.h(0);
    c[1] += 0.5 * mesh.h(1);
    Eigen::Matrix2d A = coeff(c);
    Eigen::Vector2d grad(g.grad(e, 0, 0), g.grad(e, 0, 1));
    acc += (A * grad)[axis] * mesh.h(other);
  }
  return acc;
}

void MacroSolution::write_field(const std::string& path_base) const {
  json header;
  header["dim"] = mesh.box.dim;
  header["cells"] = {mesh.cells[0], mesh.cells[1], mesh.cells[2]};
  header["lower"] = {mesh.box.lower[0], mesh.box.lower[1], mesh.box.lower[2]};
  header["upper"] = {mesh.box.upper[0], mesh.box.upper[1], mesh.box.upper[2]};
  header["components"] = components;
  header["layout"] = "node-major, little-endian float64";
  header["residual"] = residual;
  header["energy"] = energy;
  std::ofstream hd(path_base + ".json");
  if (!hd) throw InvalidArgument("write_field: cannot open " + path_base + ".json");
  hd << header.dump(2) << "\n";
  std::ofstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw InvalidArgument("write_field: cannot open " + path_base + ".bin");
  bin.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::string MacroSolution::axis_csv(int axis) const {
  std::string out = "coordinate";
  for (int c = 0; c < components; ++c) out += ",v" + std::to_string(c);
  out += "\n";
  const int d = mesh.box.dim;
  long n = mesh.cells[axis] + 1;
  // walk nodes along `axis` through the center of the other axes
  long fixed[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) fixed[a] = mesh.cells[a] / 2;
  char buf[64];
  for (long i = 0; i < n; ++i) {
    long idx[3] = {fixed[0], fixed[1], fixed[2]};
    idx[axis] = i;
    long id = 0;
    for (int a = d - 1; a >= 0; --a) id = id * (mesh.cells[a] + 1) + idx[a];
    std::snprintf(buf, sizeof(buf), "%.17g", mesh.box.lower[axis] + mesh.h(axis) * static_cast<double>(i));
    out += buf;
    for (int c = 0; c < components; ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g", value(id, c));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace lphom
