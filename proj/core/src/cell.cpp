#include "lphom/cell.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "lphom/parallel.hpp"

namespace lphom {

namespace {

using json = nlohmann::ordered_json;

// 2x2 Gauss on the reference square [0,1]^2
struct QPoint {
  double xi, eta, w;
};

std::array<QPoint, 4> qpoints() {
  const double g0 = 0.5 - 0.5 / std::sqrt(3.0), g1 = 0.5 + 0.5 / std::sqrt(3.0);
  return {QPoint{g0, g0, 0.25}, QPoint{g1, g0, 0.25}, QPoint{g0, g1, 0.25}, QPoint{g1, g1, 0.25}};
}

// gradients of the four bilinear shapes wrt (xi, eta) at a point
Eigen::Matrix<double, 4, 2> shape_grads(double xi, double eta) {
  Eigen::Matrix<double, 4, 2> g;
  g << -(1 - eta), -(1 - xi),  // node (0,0)
      (1 - eta), -xi,          // node (1,0)
      -eta, (1 - xi),          // node (0,1)
      eta, xi;                 // node (1,1)
  return g;
}

// physical cell gradients: pullback by the shear map, then scaled by 1/h
Eigen::Matrix<double, 4, 2> physical_grads(double xi, double eta, double h, double w) {
  Eigen::Matrix<double, 4, 2> g = shape_grads(xi, eta) / h;
  // J = [[1, w], [0, 1]], grad_phys = J^{-T} grad_param = (gs, gt - w*gs)
  Eigen::Matrix<double, 4, 2> out;
  out.col(0) = g.col(0);
  out.col(1) = g.col(1) - w * g.col(0);
  return out;
}

// Mandel strain-displacement matrix (6 x 12) of one quadrature point
Eigen::Matrix<double, 6, 12> bmatrix(const Eigen::Matrix<double, 4, 2>& grads, double gamma_value) {
  const Eigen::Matrix<double, 2, 3> R = rhat(gamma_value);
  const double s2 = std::sqrt(2.0);
  constexpr int pair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  Eigen::Matrix<double, 6, 12> B = Eigen::Matrix<double, 6, 12>::Zero();
  for (int a = 0; a < 4; ++a) {
    Vec3 g = R.transpose() * grads.row(a).transpose();  // (Rhat^T grad N_a)
    for (int c = 0; c < 3; ++c) {
      int dof = a * 3 + c;
      for (int K = 0; K < 6; ++K) {
        int k = pair[K][0], l = pair[K][1];
        double e = 0.5 * ((c == k ? g[l] : 0.0) + (c == l ? g[k] : 0.0));
        B(K, dof) = (K >= 3 ? s2 : 1.0) * e;
      }
    }
  }
  return B;
}

std::array<int, 4> element_nodes(int n, int i, int j) {
  auto node = [n](int a, int b) { return ((b % n + n) % n) * n + ((a % n + n) % n); };
  return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
}

void subtract_mean(std::vector<double>& v, int comps) {
  std::size_t nodes = v.size() / static_cast<std::size_t>(comps);
  for (int c = 0; c < comps; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) mean += v[i * comps + c];
    mean /= static_cast<double>(nodes);
    for (std::size_t i = 0; i < nodes; ++i) v[i * comps + c] -= mean;
  }
}

bool sheared_fibre(double a, double w, double y1, double y2) {
  // disk centers at (k2 + 1/2 + w (k3 + 1/2), k3 + 1/2)
  for (int dk3 = -1; dk3 <= 1; ++dk3) {
    double k3 = std::round(y2 - 0.5) + dk3;
    double cy = k3 + 0.5;
    double k2 = std::round(y1 - 0.5 - w * cy);
    for (int dk2 = -1; dk2 <= 1; ++dk2) {
      double cx = k2 + dk2 + 0.5 + w * cy;
      double dx = y1 - cx, dy = y2 - cy;
      if (dx * dx + dy * dy <= a * a) return true;
    }
  }
  return false;
}

}  // namespace

double PeriodicCellGrid::fibre_fraction() const {
  if (phase.empty()) return 0.0;
  long c = 0;
  for (std::uint8_t p : phase) c += p;
  return static_cast<double>(c) / static_cast<double>(phase.size());
}

PeriodicCellGrid build_cell_coefficient(double a, const Tensor4& E1, const Tensor4& E2, int n) {
  if (!(a > 0.0) || !(a < 0.5)) throw InvalidArgument("build_cell_coefficient: a must lie in (0, 1/2)");
  if (n < 2) throw InvalidArgument("build_cell_coefficient: grid too small");
  E1.validate("E1");
  E2.validate("E2");
  PeriodicCellGrid g;
  g.n = n;
  g.E1 = E1;
  g.E2 = E2;
  g.phase.resize(static_cast<std::size_t>(n) * n);
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double dx = (i + 0.5) * h - 0.5, dy = (j + 0.5) * h - 0.5;
      g.phase[static_cast<std::size_t>(j) * n + i] = (dx * dx + dy * dy <= a * a) ? 1 : 0;
    }
  return g;
}

PeriodicCellGrid build_cell_coefficient_sheared(double a, const Tensor4& E1, const Tensor4& E2,
                                                int n, double w) {
  if (!(a > 0.0) || !(a < 0.5)) throw InvalidArgument("build_cell_coefficient_sheared: a in (0, 1/2)");
  if (!(std::abs(w) <= 50.0))
    throw InvalidArgument("build_cell_coefficient_sheared: shear parameter out of range");
  E1.validate("E1");
  E2.validate("E2");
  PeriodicCellGrid g;
  g.n = n;
  g.shear_w = w;
  g.E1 = E1;
  g.E2 = E2;
  g.phase.resize(static_cast<std::size_t>(n) * n);
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double s = (i + 0.5) * h, t = (j + 0.5) * h;
      double y1 = s + w * t;  // physical yhat coordinates on Z-hat
      g.phase[static_cast<std::size_t>(j) * n + i] = sheared_fibre(a, w, y1, t) ? 1 : 0;
    }
  return g;
}

PeriodicCellGrid build_cell_scalar(const std::function<double(double, double)>& coeff, int n) {
  if (n < 2) throw InvalidArgument("build_cell_scalar: grid too small");
  PeriodicCellGrid g;
  g.n = n;
  g.scalar.resize(static_cast<std::size_t>(n) * n);
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double v = coeff((i + 0.5) * h, (j + 0.5) * h);
      if (!(v > 0.0)) throw InvalidArgument("build_cell_scalar: coefficient must be positive");
      g.scalar[static_cast<std::size_t>(j) * n + i] = v;
    }
  return g;
}

Eigen::Matrix<double, 2, 3> rhat(double gamma_value) {
  Eigen::Matrix<double, 2, 3> r;
  r << -std::sin(gamma_value), std::cos(gamma_value), 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 reduced_strain(const Eigen::Matrix<double, 3, 2>& grads, double gamma_value) {
  Mat3 m = rhat(gamma_value).transpose() * grads.transpose();
  return 0.5 * (m + m.transpose());
}

CsrMatrix assemble_cell_matrix(const PeriodicCellGrid& grid, double gamma_value) {
  const int n = grid.n;
  const double h = 1.0 / n;
  if (grid.is_scalar()) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(grid.elements()) * 16);
    // reference element matrix, coefficient-scaled per element
    Eigen::Matrix4d Kref = Eigen::Matrix4d::Zero();
    for (const QPoint& q : qpoints()) {
      auto G = physical_grads(q.xi, q.eta, h, grid.shear_w);
      Kref += (h * h * q.w) * (G * G.transpose());
    }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double c = grid.scalar[static_cast<std::size_t>(j) * n + i];
        auto nd = element_nodes(n, i, j);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) trip.push_back({nd[a], nd[b], c * Kref(a, b)});
      }
    return CsrMatrix::from_triplets(grid.nodes(), std::move(trip));
  }

  // elastic: two palette-local matrices
  std::array<Eigen::Matrix<double, 12, 12>, 2> Kpal;
  Kpal[0].setZero();
  Kpal[1].setZero();
  const Mat6 M2 = grid.E2.mandel(), M1 = grid.E1.mandel();
  for (const QPoint& q : qpoints()) {
    auto B = bmatrix(physical_grads(q.xi, q.eta, h, grid.shear_w), gamma_value);
    Kpal[0] += (h * h * q.w) * (B.transpose() * M2 * B);
    Kpal[1] += (h * h * q.w) * (B.transpose() * M1 * B);
  }
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(grid.elements()) * 144);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto& Ke = Kpal[grid.phase[static_cast<std::size_t>(j) * n + i]];
      auto nd = element_nodes(n, i, j);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int ca = 0; ca < 3; ++ca)
            for (int cb = 0; cb < 3; ++cb)
              trip.push_back({static_cast<std::int64_t>(nd[a]) * 3 + ca,
                              static_cast<std::int64_t>(nd[b]) * 3 + cb,
                              Ke(a * 3 + ca, b * 3 + cb)});
    }
  return CsrMatrix::from_triplets(grid.nodes() * 3, std::move(trip));
}

namespace {

// Mandel vectors of the probe matrices l_ij
Vec6 mandel_vec(const Mat3& m) {
  const double s2 = std::sqrt(2.0);
  Vec6 v;
  v << m(0, 0), m(1, 1), m(2, 2), s2 * m(1, 2), s2 * m(0, 2), s2 * m(0, 1);
  return v;
}

Mat3 unmandel(const Vec6& v) {
  const double s2 = std::sqrt(2.0);
  Mat3 m;
  m << v[0], v[5] / s2, v[4] / s2, v[5] / s2, v[1], v[3] / s2, v[4] / s2, v[3] / s2, v[2];
  return m;
}

CorrectorSet solve_elastic_impl(const PeriodicCellGrid& grid, double gamma_value, double tol) {
  if (grid.is_scalar()) throw InvalidArgument("solve_cell_elastic: scalar grid supplied");
  const int n = grid.n;
  const double h = 1.0 / n;
  CsrMatrix K = assemble_cell_matrix(grid, gamma_value);

  // per-phase load contributions: f_e = -int B^T M lhat_ij
  auto probes = probe_basis();
  std::array<std::array<Eigen::Matrix<double, 12, 1>, 6>, 2> fpal;
  const Mat6 Mpal[2] = {grid.E2.mandel(), grid.E1.mandel()};
  for (int p = 0; p < 2; ++p)
    for (int I = 0; I < 6; ++I) fpal[p][I].setZero();
  for (const QPoint& q : qpoints()) {
    auto B = bmatrix(physical_grads(q.xi, q.eta, h, grid.shear_w), gamma_value);
    for (int p = 0; p < 2; ++p)
      for (int I = 0; I < 6; ++I)
        fpal[p][I] -= (h * h * q.w) * (B.transpose() * (Mpal[p] * mandel_vec(probes[static_cast<std::size_t>(I)])));
  }

  CorrectorSet out;
  out.n = n;
  out.gamma_value = gamma_value;
  out.shear_w = grid.shear_w;

  std::array<std::vector<double>, 6> rhs;
  for (int I = 0; I < 6; ++I) rhs[I].assign(static_cast<std::size_t>(grid.nodes()) * 3, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int p = grid.phase[static_cast<std::size_t>(j) * n + i];
      auto nd = element_nodes(n, i, j);
      for (int I = 0; I < 6; ++I)
        for (int a = 0; a < 4; ++a)
          for (int c = 0; c < 3; ++c)
            rhs[I][static_cast<std::size_t>(nd[a]) * 3 + c] += fpal[p][I](a * 3 + c);
    }

  parallel_for(6, [&](std::int64_t I) {
    std::vector<double> x(static_cast<std::size_t>(grid.nodes()) * 3, 0.0);
    CgOptions opts;
    opts.rel_tol = tol;
    opts.max_iterations = 50l * n * 3;
    opts.deflate_components = 3;
    CgResult res = cg_solve(K, rhs[static_cast<std::size_t>(I)], x, opts);
    subtract_mean(x, 3);
    out.fields[static_cast<std::size_t>(I)] = std::move(x);
    out.residuals[static_cast<std::size_t>(I)] = res.rel_residual;
    out.iterations[static_cast<std::size_t>(I)] = res.iterations;
  });
  return out;
}

Tensor4 assemble_hom_impl(const PeriodicCellGrid& grid, double gamma_value,
                          const CorrectorSet& correctors, double sym_tol, const char* what) {
  if (grid.is_scalar()) throw InvalidArgument("assemble_hom: scalar grid supplied");
  if (correctors.n != grid.n) throw InvalidArgument("assemble_hom: corrector/grid mismatch");
  const int n = grid.n;
  const double h = 1.0 / n;
  auto probes = probe_basis();
  const Mat6 Mpal[2] = {grid.E2.mandel(), grid.E1.mandel()};

  std::array<Vec6, 6> columns;
  for (auto& c : columns) c.setZero();

  std::array<Eigen::Matrix<double, 6, 12>, 4> Bq;
  {
    auto qp = qpoints();
    for (int q = 0; q < 4; ++q)
      Bq[static_cast<std::size_t>(q)] =
          bmatrix(physical_grads(qp[static_cast<std::size_t>(q)].xi, qp[static_cast<std::size_t>(q)].eta, h, grid.shear_w), gamma_value);
  }
  auto qp = qpoints();

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int p = grid.phase[static_cast<std::size_t>(j) * n + i];
      auto nd = element_nodes(n, i, j);
      for (int I = 0; I < 6; ++I) {
        Eigen::Matrix<double, 12, 1> ue;
        const auto& field = correctors.fields[static_cast<std::size_t>(I)];
        for (int a = 0; a < 4; ++a)
          for (int c = 0; c < 3; ++c) ue(a * 3 + c) = field[static_cast<std::size_t>(nd[a]) * 3 + c];
        for (int q = 0; q < 4; ++q) {
          Vec6 strain = Bq[static_cast<std::size_t>(q)] * ue + mandel_vec(probes[static_cast<std::size_t>(I)]);
          columns[static_cast<std::size_t>(I)] += (h * h * qp[static_cast<std::size_t>(q)].w) * (Mpal[p] * strain);
        }
      }
    }

  // cell has unit measure (the shear map is unimodular)
  Tensor4 A;
  for (int I = 0; I < 6; ++I) {
    Mat3 S = unmandel(columns[static_cast<std::size_t>(I)]);
    constexpr int pair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
    int i = pair[I][0], jj = pair[I][1];
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        A(i, jj, k, l) = S(k, l);
        A(jj, i, k, l) = S(k, l);
      }
  }

  double scale = std::max(1.0, A.frobenius_norm());
  if (A.major_symmetry_defect() > sym_tol * scale || A.minor_symmetry_defect() > sym_tol * scale)
    throw SolverError(std::string(what) + ": assembled tensor violates symmetry beyond tolerance");
  return A;
}

}  // namespace

CorrectorSet solve_cell_elastic(const PeriodicCellGrid& grid, double gamma_value, double tol) {
  if (grid.shear_w != 0.0)
    throw InvalidArgument("solve_cell_elastic: grid carries a shear, use solve_cell_sheared");
  return solve_elastic_impl(grid, gamma_value, tol);
}

CorrectorSet solve_cell_sheared(const PeriodicCellGrid& grid, double gamma_value, double tol) {
  return solve_elastic_impl(grid, gamma_value, tol);
}

ScalarCorrectorSet solve_cell_scalar(const PeriodicCellGrid& grid, double tol) {
  if (!grid.is_scalar()) throw InvalidArgument("solve_cell_scalar: elastic grid supplied");
  const int n = grid.n;
  const double h = 1.0 / n;
  CsrMatrix K = assemble_cell_matrix(grid, 0.0);

  ScalarCorrectorSet out;
  out.n = n;
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> rhs(static_cast<std::size_t>(grid.nodes()), 0.0);
    for (const QPoint& q : qpoints()) {
      auto G = physical_grads(q.xi, q.eta, h, grid.shear_w);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double c = grid.scalar[static_cast<std::size_t>(j) * n + i];
          auto nd = element_nodes(n, i, j);
          for (int a = 0; a < 4; ++a)
            rhs[static_cast<std::size_t>(nd[a])] -= (h * h * q.w) * c * G(a, dir);
        }
    }
    std::vector<double> x(static_cast<std::size_t>(grid.nodes()), 0.0);
    CgOptions opts;
    opts.rel_tol = tol;
    opts.max_iterations = 50l * n;
    opts.deflate_components = 1;
    CgResult res = cg_solve(K, rhs, x, opts);
    subtract_mean(x, 1);
    out.fields[static_cast<std::size_t>(dir)] = std::move(x);
    out.residuals[static_cast<std::size_t>(dir)] = res.rel_residual;
  }
  return out;
}

Tensor4 assemble_Ahom(const PeriodicCellGrid& grid, double gamma_value,
                      const CorrectorSet& correctors, double sym_tol) {
  return assemble_hom_impl(grid, gamma_value, correctors, sym_tol, "assemble_Ahom");
}

Tensor4 assemble_Bhom(const PeriodicCellGrid& grid, double gamma_value,
                      const CorrectorSet& correctors, double sym_tol) {
  return assemble_hom_impl(grid, gamma_value, correctors, sym_tol, "assemble_Bhom");
}

Eigen::Matrix2d assemble_scalar_hom(const PeriodicCellGrid& grid,
                                    const ScalarCorrectorSet& correctors) {
  if (!grid.is_scalar()) throw InvalidArgument("assemble_scalar_hom: elastic grid supplied");
  const int n = grid.n;
  const double h = 1.0 / n;
  Eigen::Matrix2d Ahom = Eigen::Matrix2d::Zero();
  for (const QPoint& q : qpoints()) {
    auto G = physical_grads(q.xi, q.eta, h, grid.shear_w);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double c = grid.scalar[static_cast<std::size_t>(j) * n + i];
        auto nd = element_nodes(n, i, j);
        for (int dir = 0; dir < 2; ++dir) {
          Eigen::Vector2d grad = Eigen::Vector2d::Zero();
          const auto& field = correctors.fields[static_cast<std::size_t>(dir)];
          for (int a = 0; a < 4; ++a)
            grad += field[static_cast<std::size_t>(nd[a])] * G.row(a).transpose();
          grad[dir] += 1.0;
          Ahom.col(dir) += (h * h * q.w) * c * grad;
        }
      }
  }
  return Ahom;
}

Tensor4 HomogenizedTensorField::at(double coordinate) const {
  if (samples.empty()) throw InvalidArgument("HomogenizedTensorField: empty field");
  if (samples.size() == 1) return samples.front().tensor;
  const double lo = samples.front().coordinate, hi = samples.back().coordinate;
  if (coordinate < lo - 1e-12 || coordinate > hi + 1e-12)
    throw InvalidArgument("HomogenizedTensorField: coordinate outside the sampled range");
  double c = std::clamp(coordinate, lo, hi);
  std::size_t k = 1;
  while (k + 1 < samples.size() && samples[k].coordinate < c) ++k;
  const TensorSample& s0 = samples[k - 1];
  const TensorSample& s1 = samples[k];
  double t = (c - s0.coordinate) / (s1.coordinate - s0.coordinate);
  return s0.tensor * (1.0 - t) + s1.tensor * t;
}

std::string HomogenizedTensorField::to_json() const {
  json out = json::array();
  for (const TensorSample& s : samples) {
    json js;
    js["sample_coordinate"] = s.coordinate;
    Mat6 C = s.tensor.voigt();
    json rows = json::array();
    for (int i = 0; i < 6; ++i) {
      json row = json::array();
      for (int j = 0; j < 6; ++j) row.push_back(C(i, j));
      rows.push_back(row);
    }
    js["tensor_voigt_6x6"] = rows;
    js["volume_fraction"] = s.volume_fraction;
    js["residuals"] = s.max_residual;
    js["grid_n"] = s.grid_n;
    out.push_back(js);
  }
  return out.dump(2);
}

std::string HomogenizedTensorField::to_csv() const {
  std::string out = "sample_coordinate";
  constexpr const char* names[6] = {"11", "22", "33", "23", "13", "12"};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      out += std::string(",C") + names[i] + "_" + names[j];
  out += "\n";
  char buf[64];
  for (const TensorSample& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.coordinate);
    out += buf;
    Mat6 C = s.tensor.voigt();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", C(i, j));
        out += buf;
      }
    out += "\n";
  }
  return out;
}

HomogenizedTensorField HomogenizedTensorField::from_json(const std::string& text) {
  json in = json::parse(text);
  HomogenizedTensorField field;
  for (const auto& js : in) {
    TensorSample s;
    s.coordinate = js.at("sample_coordinate").get<double>();
    Mat6 C;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) C(i, j) = js.at("tensor_voigt_6x6").at(i).at(j).get<double>();
    s.tensor = Tensor4::from_voigt(C);
    s.volume_fraction = js.at("volume_fraction").get<double>();
    s.max_residual = js.at("residuals").get<double>();
    s.grid_n = js.at("grid_n").get<int>();
    field.samples.push_back(s);
  }
  return field;
}

namespace {

std::vector<double> chebyshev_lobatto(double lo, double hi, int n) {
  std::vector<double> pts;
  if (n == 1) {
    pts.push_back(0.5 * (lo + hi));
    return pts;
  }
  for (int i = 0; i < n; ++i) {
    double t = -std::cos(M_PI * i / (n - 1));  // ascending in [-1,1]
    pts.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * t);
  }
  pts.front() = lo;
  pts.back() = hi;
  return pts;
}

}  // namespace

HomogenizedTensorField sample_Ahom_field(const RotationAngleField& gamma, double a,
                                         const Tensor4& E1, const Tensor4& E2, int grid_n,
                                         double lo, double hi, int num_samples) {
  PeriodicCellGrid grid = build_cell_coefficient(a, E1, E2, grid_n);
  HomogenizedTensorField field;
  for (double x3 : chebyshev_lobatto(lo, hi, num_samples)) {
    double g = gamma.gamma(x3);
    CorrectorSet cs = solve_cell_elastic(grid, g);
    TensorSample s;
    s.coordinate = x3;
    s.tensor = assemble_Ahom(grid, g, cs);
    s.volume_fraction = grid.fibre_fraction();
    s.max_residual = *std::max_element(cs.residuals.begin(), cs.residuals.end());
    s.grid_n = grid_n;
    field.samples.push_back(s);
  }
  return field;
}

Tensor4 compute_Bhom(const RotationAngleField& gamma, double a, const Tensor4& E1,
                     const Tensor4& E2, int grid_n, const Vec3& x, double* volume_fraction,
                     double* max_residual) {
  double w = shear_value(x, gamma);
  double g = gamma.gamma(x[2]);
  PeriodicCellGrid grid = build_cell_coefficient_sheared(a, E1, E2, grid_n, w);
  CorrectorSet cs = solve_cell_sheared(grid, g);
  if (volume_fraction) *volume_fraction = grid.fibre_fraction();
  if (max_residual) *max_residual = *std::max_element(cs.residuals.begin(), cs.residuals.end());
  return assemble_Bhom(grid, g, cs);
}

HomogenizedTensorField sample_Bhom_field(const RotationAngleField& gamma, double a,
                                         const Tensor4& E1, const Tensor4& E2, int grid_n,
                                         const Vec3& x12, double lo, double hi, int num_samples) {
  HomogenizedTensorField field;
  for (double x3 : chebyshev_lobatto(lo, hi, num_samples)) {
    Vec3 x(x12[0], x12[1], x3);
    TensorSample s;
    s.coordinate = x3;
    s.tensor = compute_Bhom(gamma, a, E1, E2, grid_n, x, &s.volume_fraction, &s.max_residual);
    s.grid_n = grid_n;
    field.samples.push_back(s);
  }
  return field;
}

}  // namespace lphom
