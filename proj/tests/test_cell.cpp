#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "lphom/cell.hpp"
#include "lphom/parallel.hpp"

using namespace lphom;

namespace {

const Tensor4 kFibre = Tensor4::isotropic(2.0, 1.5);
const Tensor4 kMatrix = Tensor4::isotropic(1.0, 0.5);

PeriodicCellGrid laminate_grid(double a1, double a2, int n) {
  return build_cell_scalar([&](double, double y2) { return y2 < 0.5 ? a1 : a2; }, n);
}

}  // namespace

TEST_CASE("cell coefficient disk fraction") {
  PeriodicCellGrid g = build_cell_coefficient(0.25, kFibre, kMatrix, 64);
  CHECK(std::abs(g.fibre_fraction() - M_PI / 16) <= 2.0 / 64);

  PeriodicCellGrid big = build_cell_coefficient(0.49, kFibre, kMatrix, 128);
  CHECK(std::abs(big.fibre_fraction() - M_PI * 0.49 * 0.49) <= 0.02);

  CHECK_THROWS_AS(build_cell_coefficient(0.6, kFibre, kMatrix, 32), InvalidArgument);
  Tensor4 bad = kFibre;
  bad(0, 1, 0, 0) += 1.0;
  CHECK_THROWS_WITH_AS(build_cell_coefficient(0.25, bad, kMatrix, 32),
                       doctest::Contains("minor symmetry"), InvalidArgument);
}

TEST_CASE("reduced strain") {
  // constant fields have zero strain
  Eigen::Matrix<double, 3, 2> zero = Eigen::Matrix<double, 3, 2>::Zero();
  CHECK(reduced_strain(zero, 0.7).norm() == 0.0);

  // gamma = 0, grad v^3 = (0, 1): the 33 entry is 1
  Eigen::Matrix<double, 3, 2> g = Eigen::Matrix<double, 3, 2>::Zero();
  g(2, 1) = 1.0;
  Mat3 e = reduced_strain(g, 0.0);
  CHECK(e(2, 2) == doctest::Approx(1.0));
  CHECK(e(0, 0) == doctest::Approx(0.0));

  // symmetry is exact for random inputs
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    Eigen::Matrix<double, 3, 2> r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = rng.uniform(-1, 1);
    Mat3 s = reduced_strain(r, rng.uniform(0, M_PI));
    CHECK((s - s.transpose()).norm() == 0.0);
  }
}

TEST_CASE("equal phases give zero correctors and A^hom = E") {
  PeriodicCellGrid g = build_cell_coefficient(0.25, kMatrix, kMatrix, 64);
  CorrectorSet cs = solve_cell_elastic(g, 0.6);
  for (const auto& field : cs.fields)
    for (double v : field) CHECK(std::abs(v) <= 1e-9);
  Tensor4 Ahom = assemble_Ahom(g, 0.6, cs);
  CHECK((Ahom - kMatrix).frobenius_norm() <= 1e-8 * kMatrix.frobenius_norm());
}

TEST_CASE("solver residual contract") {
  PeriodicCellGrid g = build_cell_coefficient(0.25, kFibre, kMatrix, 32);
  CorrectorSet cs = solve_cell_elastic(g, 0.9);
  for (double r : cs.residuals) CHECK(r <= 1e-10);
}

TEST_CASE("scalar laminate corrector matches the 1D closed form") {
  const double a1 = 1.0, a2 = 4.0;
  const int n = 64;
  PeriodicCellGrid g = laminate_grid(a1, a2, n);
  ScalarCorrectorSet cs = solve_cell_scalar(g);
  Eigen::Matrix2d ahom = assemble_scalar_hom(g, cs);
  CHECK(ahom(0, 0) == doctest::Approx(2.5).epsilon(1e-8));   // along layers
  CHECK(ahom(1, 1) == doctest::Approx(1.6).epsilon(1e-8));   // across layers
  CHECK(std::abs(ahom(0, 1)) <= 1e-10);

  // omega_2 is piecewise linear in y2: slope c/a - 1 per phase, c = 1.6
  const auto& w = cs.fields[1];
  auto node = [n](int i, int j) { return (j % n) * n + (i % n); };
  for (int j = 1; j + 1 < n; ++j) {
    if (j == n / 2 || j + 1 == n / 2) continue;  // interface nodes
    double slope = (w[static_cast<std::size_t>(node(3, j + 1))] - w[static_cast<std::size_t>(node(3, j))]) * n;
    double expected = (j + 0.5) / n < 0.5 ? 1.6 / a1 - 1.0 : 1.6 / a2 - 1.0;
    CHECK(slope == doctest::Approx(expected).epsilon(1e-6));
  }

  // corrector for the along direction vanishes
  for (double v : cs.fields[0]) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("checkerboard duality oracle") {
  const double a1 = 1.0, a2 = 4.0;
  PeriodicCellGrid g = build_cell_scalar(
      [&](double y1, double y2) { return (y1 < 0.5) == (y2 < 0.5) ? a1 : a2; }, 256);
  ScalarCorrectorSet cs = solve_cell_scalar(g);
  Eigen::Matrix2d ahom = assemble_scalar_hom(g, cs);
  double target = std::sqrt(a1 * a2);
  CHECK(ahom(0, 0) == doctest::Approx(target).epsilon(0.01));
  CHECK(ahom(1, 1) == doctest::Approx(target).epsilon(0.01));
}

TEST_CASE("cell stiffness kernels are exactly the constants") {
  // scalar grid: one zero mode
  PeriodicCellGrid gs = build_cell_scalar([](double, double) { return 2.0; }, 4);
  CsrMatrix Ks = assemble_cell_matrix(gs, 0.0);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(Ks.rows(), Ks.rows());
  for (long r = 0; r < Ks.rows(); ++r)
    for (long k = Ks.row_ptr()[static_cast<std::size_t>(r)]; k < Ks.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
      dense(r, Ks.cols()[static_cast<std::size_t>(k)]) = Ks.values()[static_cast<std::size_t>(k)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  int zeros = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) < 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff()) ++zeros;
  CHECK(zeros == 1);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);

  // elastic grid: three zero modes (per-component constants)
  PeriodicCellGrid ge = build_cell_coefficient(0.3, kFibre, kMatrix, 3);
  CsrMatrix Ke = assemble_cell_matrix(ge, 0.4);
  Eigen::MatrixXd de = Eigen::MatrixXd::Zero(Ke.rows(), Ke.rows());
  for (long r = 0; r < Ke.rows(); ++r)
    for (long k = Ke.row_ptr()[static_cast<std::size_t>(r)]; k < Ke.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
      de(r, Ke.cols()[static_cast<std::size_t>(k)]) = Ke.values()[static_cast<std::size_t>(k)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ee(de);
  int zeros3 = 0;
  for (int i = 0; i < ee.eigenvalues().size(); ++i)
    if (std::abs(ee.eigenvalues()[i]) < 1e-10 * ee.eigenvalues().cwiseAbs().maxCoeff()) ++zeros3;
  CHECK(zeros3 == 3);
  CHECK(ee.eigenvalues().minCoeff() >= -1e-10);
  CHECK(Ke.symmetry_defect() <= 1e-12);
}

TEST_CASE("A^hom structural invariants and bounds") {
  PeriodicCellGrid g = build_cell_coefficient(0.25, kFibre, kMatrix, 48);
  for (double gamma : {0.0, 0.7}) {
    CorrectorSet cs = solve_cell_elastic(g, gamma);
    Tensor4 A = assemble_Ahom(g, gamma, cs);
    CHECK(A.minor_symmetry_defect() <= 1e-8);
    CHECK(A.major_symmetry_defect() <= 1e-8);
    CHECK(A.min_probe_rayleigh() > 0.0);
    CHECK(A.min_eigenvalue() > 0.0);
    TensorBounds b = voigt_reuss_bounds(g.fibre_fraction(), kFibre, kMatrix);
    for (const Mat3& xi : probe_basis()) {
      CHECK(A.quadratic_form(xi) <= b.voigt.quadratic_form(xi) + 1e-9);
      CHECK(A.quadratic_form(xi) >= b.reuss.quadratic_form(xi) - 1e-9);
    }
  }
}

TEST_CASE("A^hom mesh convergence") {
  // The 16^2 and 32^2 disks happen to carry the same pixel fraction, which
  // makes the first difference accidentally small; from 32^2 on the
  // consecutive differences shrink. Assert the terminal difference beats
  // every earlier one.
  std::vector<double> diffs;
  Tensor4 prev;
  bool first = true;
  for (int n : {16, 32, 64, 128}) {
    PeriodicCellGrid g = build_cell_coefficient(0.25, kFibre, kMatrix, n);
    CorrectorSet cs = solve_cell_elastic(g, 0.5);
    Tensor4 A = assemble_Ahom(g, 0.5, cs);
    if (!first) diffs.push_back((A - prev).frobenius_norm());
    prev = A;
    first = false;
  }
  REQUIRE(diffs.size() == 3);
  CHECK(diffs[2] < diffs[1]);
  CHECK(diffs[2] < diffs[0]);
  CHECK(diffs[2] <= 0.005 * prev.frobenius_norm());
}

TEST_CASE("rotation covariance of A^hom") {
  PeriodicCellGrid g = build_cell_coefficient(0.25, kFibre, kMatrix, 64);
  CorrectorSet cs0 = solve_cell_elastic(g, 0.0);
  Tensor4 A0 = assemble_Ahom(g, 0.0, cs0);
  const double gamma = M_PI / 6;
  CorrectorSet csg = solve_cell_elastic(g, gamma);
  Tensor4 Ag = assemble_Ahom(g, gamma, csg);
  Tensor4 rotated = A0.rotated(rotation(gamma).transpose());
  CHECK((Ag - rotated).frobenius_norm() <= 0.02 * Ag.frobenius_norm());
}

TEST_CASE("sheared cell solves") {
  // w = 0 reduces exactly to the square-cell solve
  PeriodicCellGrid flat = build_cell_coefficient_sheared(0.25, kFibre, kMatrix, 32, 0.0);
  PeriodicCellGrid square = build_cell_coefficient(0.25, kFibre, kMatrix, 32);
  CHECK(flat.phase == square.phase);
  CorrectorSet c1 = solve_cell_sheared(flat, 0.8);
  CorrectorSet c2 = solve_cell_elastic(square, 0.8);
  Tensor4 B = assemble_Bhom(flat, 0.8, c1);
  Tensor4 A = assemble_Ahom(square, 0.8, c2);
  CHECK((B - A).frobenius_norm() <= 1e-9 * A.frobenius_norm());

  // constant coefficient: correctors vanish, B^hom = E for any shear
  PeriodicCellGrid cw = build_cell_coefficient_sheared(0.25, kMatrix, kMatrix, 24, 0.35);
  CorrectorSet cc = solve_cell_sheared(cw, 0.4);
  Tensor4 Bc = assemble_Bhom(cw, 0.4, cc);
  CHECK((Bc - kMatrix).frobenius_norm() <= 1e-8 * kMatrix.frobenius_norm());

  // a sheared grid refuses the square-cell entry point
  CHECK_THROWS_AS(solve_cell_elastic(cw, 0.4), InvalidArgument);
}

TEST_CASE("B^hom against A^hom for constant gamma and Reuss-Voigt sandwich") {
  RotationAngleField gamma = RotationAngleField::constant(0.9);
  // gamma' = 0 makes w(x) = 0 everywhere: the two pipelines coincide
  Tensor4 B = compute_Bhom(gamma, 0.25, kFibre, kMatrix, 32, Vec3(0.3, 0.4, 0.5));
  PeriodicCellGrid g = build_cell_coefficient(0.25, kFibre, kMatrix, 32);
  CorrectorSet cs = solve_cell_elastic(g, 0.9);
  Tensor4 A = assemble_Ahom(g, 0.9, cs);
  CHECK((B - A).frobenius_norm() <= 1e-9 * A.frobenius_norm());

  RotationAngleField varying = RotationAngleField::default_sin();
  Rng rng(33);
  for (int s = 0; s < 5; ++s) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    double fraction = 0.0;
    Tensor4 Bx = compute_Bhom(varying, 0.25, kFibre, kMatrix, 32, x, &fraction);
    TensorBounds b = voigt_reuss_bounds(fraction, kFibre, kMatrix);
    for (const Mat3& xi : probe_basis()) {
      CHECK(Bx.quadratic_form(xi) <= b.voigt.quadratic_form(xi) + 1e-9);
      CHECK(Bx.quadratic_form(xi) >= b.reuss.quadratic_form(xi) - 1e-9);
    }
  }
}

TEST_CASE("homogenized tensor field sampling and interpolation") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  HomogenizedTensorField field = sample_Ahom_field(gamma, 0.25, kFibre, kMatrix, 16, 0.0, 1.0, 5);
  REQUIRE(field.samples.size() == 5);
  CHECK(field.samples.front().coordinate == doctest::Approx(0.0));
  CHECK(field.samples.back().coordinate == doctest::Approx(1.0));
  for (std::size_t i = 1; i < field.samples.size(); ++i)
    CHECK(field.samples[i].coordinate > field.samples[i - 1].coordinate);
  // interpolation reproduces the samples and stays symmetric in between
  Tensor4 mid = field.at(0.5 * (field.samples[1].coordinate + field.samples[2].coordinate));
  CHECK(mid.major_symmetry_defect() <= 1e-8);
  CHECK((field.at(field.samples[2].coordinate) - field.samples[2].tensor).frobenius_norm() <= 1e-12);
  CHECK_THROWS_AS(field.at(2.0), InvalidArgument);

  // json round trip preserves the samples
  HomogenizedTensorField back = HomogenizedTensorField::from_json(field.to_json());
  REQUIRE(back.samples.size() == field.samples.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i)
    CHECK((back.samples[i].tensor - field.samples[i].tensor).frobenius_norm() <= 1e-12);
  std::string csv = field.to_csv();
  CHECK(csv.find("sample_coordinate,C11_11") == 0);
}
