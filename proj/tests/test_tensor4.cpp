#include <doctest.h>

#include <cmath>

#include "lphom/parallel.hpp"
#include "lphom/tensor4.hpp"
#include "lphom/transform.hpp"

using namespace lphom;

TEST_CASE("isotropic tensor satisfies all symmetries and definiteness") {
  Tensor4 E = Tensor4::isotropic(2.0, 1.0);
  CHECK(E.minor_symmetry_defect() == 0.0);
  CHECK(E.major_symmetry_defect() == 0.0);
  CHECK(E.min_eigenvalue() > 0.0);
  CHECK(E.min_probe_rayleigh() > 0.0);
  CHECK_NOTHROW(E.validate("E"));
  // isotropic: E:xi = lambda tr(xi) I + 2 mu xi
  Mat3 xi;
  xi << 1, 0.5, 0, 0.5, -2, 0.25, 0, 0.25, 0.5;
  Mat3 expect = 2.0 * xi.trace() * Mat3::Identity() + 2.0 * xi;
  CHECK((E.apply(xi) - expect).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("voigt round trip and mandel consistency") {
  Tensor4 E = Tensor4::isotropic(1.3, 0.7);
  Tensor4 back = Tensor4::from_voigt(E.voigt());
  CHECK((E - back).frobenius_norm() <= 1e-14);
  Tensor4 back2 = Tensor4::from_mandel(E.mandel());
  CHECK((E - back2).frobenius_norm() <= 1e-14);
}

TEST_CASE("validate names the violated symmetry") {
  Tensor4 E = Tensor4::isotropic(1.0, 1.0);
  E(0, 1, 0, 0) += 0.5;  // breaks minor symmetry ijkl = jikl
  CHECK_THROWS_WITH_AS(E.validate("bad"), doctest::Contains("minor symmetry"), InvalidArgument);

  Mat6 C = Tensor4::isotropic(1.0, 1.0).voigt();
  C(0, 1) += 0.3;  // from_voigt keeps minor symmetries, breaks the major one
  Tensor4 M = Tensor4::from_voigt(C);
  CHECK_THROWS_WITH_AS(M.validate("bad"), doctest::Contains("major symmetry"), InvalidArgument);

  Tensor4 indef = Tensor4::isotropic(0.0, -1.0);
  CHECK_THROWS_WITH_AS(indef.validate("bad"), doctest::Contains("positive definite"),
                       InvalidArgument);
}

TEST_CASE("rotation leaves isotropic tensors invariant") {
  Tensor4 E = Tensor4::isotropic(2.0, 1.0);
  for (double alpha : {0.3, 1.2}) {
    Tensor4 R = E.rotated(rotation(alpha));
    CHECK((R - E).frobenius_norm() <= 1e-12 * E.frobenius_norm());
  }
}

TEST_CASE("inverse acts as the operator inverse on symmetric matrices") {
  Tensor4 E = Tensor4::isotropic(1.7, 0.9);
  Tensor4 Einv = E.inverse();
  for (const Mat3& xi : probe_basis()) {
    Mat3 round = Einv.apply(E.apply(xi));
    CHECK((round - xi).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("voigt and reuss bounds") {
  Tensor4 E = Tensor4::isotropic(2.0, 1.0);
  TensorBounds same = voigt_reuss_bounds(0.3, E, E);
  CHECK((same.voigt - E).frobenius_norm() <= 1e-12);
  CHECK((same.reuss - E).frobenius_norm() <= 1e-10);

  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor4 E1 = Tensor4::isotropic(rng.uniform(0.5, 3.0), rng.uniform(0.3, 2.0));
    Tensor4 E2 = Tensor4::isotropic(rng.uniform(0.5, 3.0), rng.uniform(0.3, 2.0));
    double theta = rng.uniform(0.1, 0.9);
    TensorBounds b = voigt_reuss_bounds(theta, E1, E2);
    for (const Mat3& xi : probe_basis())
      CHECK(b.reuss.quadratic_form(xi) <= b.voigt.quadratic_form(xi) + 1e-12);
  }
  CHECK_THROWS_AS(voigt_reuss_bounds(1.5, E, E), InvalidArgument);
}

TEST_CASE("scalar laminate oracle") {
  LaminateScalar lam = laminate_effective(1.0, 4.0);
  CHECK(lam.across == doctest::Approx(1.6));
  CHECK(lam.along == doctest::Approx(2.5));
}
