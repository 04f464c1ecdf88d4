#include <doctest.h>

#include <cmath>

#include "lphom/microstructure.hpp"
#include "lphom/parallel.hpp"

using namespace lphom;

namespace {

Covering plywood_covering(double eps, double r, const RotationAngleField& gamma,
                          AnchorRule anchors = AnchorRule::center, std::uint64_t seed = 0) {
  CoveringOptions opts;
  opts.anchors = anchors;
  opts.seed = seed;
  opts.field = TransformationField::plywood_lp(gamma);
  opts.layered_anchors = true;
  return build_covering(DomainBox::unit(3), eps, r, opts);
}

}  // namespace

TEST_CASE("rotation matrix basics") {
  CHECK((rotation(0.0) - Mat3::Identity()).norm() == doctest::Approx(0.0).epsilon(1e-15));
  Vec3 v = rotation(M_PI / 2) * Vec3(1, 0, 0);
  CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(v[2] == doctest::Approx(0.0));
  for (double alpha : {0.3, 1.1, 2.9})
    CHECK(rotation(alpha).determinant() == doctest::Approx(1.0).epsilon(1e-14));
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    Mat3 R = rotation(rng.uniform(0.0, 2 * M_PI));
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("shear matrix") {
  RotationAngleField cg = RotationAngleField::constant(0.7);
  CHECK((shear(Vec3(0.3, -0.2, 0.9), cg) - Mat3::Identity()).norm() == 0.0);

  RotationAngleField lin = RotationAngleField::linear();
  CHECK(shear_value(Vec3(1, 0, 0), lin) == doctest::Approx(1.0));
  Mat3 W = shear(Vec3(1, 0, 0), lin);
  CHECK(W(1, 2) == doctest::Approx(1.0));
  CHECK(W(0, 0) == 1.0);
  CHECK(W(0, 1) == 0.0);

  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    Vec3 x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK(shear(x, RotationAngleField::default_sin()).determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("transformation fields satisfy their contracts") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  gamma.check_derivatives(-1.0, 2.0);
  TransformationField::identity().check(DomainBox::unit(3));
  TransformationField::exp_1d().check(DomainBox::unit(1));
  TransformationField::rotation_2d(gamma).check(DomainBox::unit(2));
  TransformationField::plywood_lp(gamma).check(DomainBox::unit(3));
  TransformationField::plywood_np(gamma).check(DomainBox::unit(3));

  // |det D| = 1 exactly for the sheared plywood field
  TransformationField D = TransformationField::plywood_np(gamma);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    CHECK(std::abs(D.D(x).determinant()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("plywood lp indicator reduces to the periodic pattern for constant gamma") {
  RotationAngleField gamma = RotationAngleField::constant(0.0);
  IndicatorSpec spec = IndicatorSpec::plywood_lp(0.25, gamma);
  const double eps = 1.0 / 16;
  Covering cov = plywood_covering(eps, 0.5, gamma);
  Rng rng(13);
  for (int s = 0; s < 2000; ++s) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    double f2 = frac01(x[1] / eps) - 0.5, f3 = frac01(x[2] / eps) - 0.5;
    int periodic = (f2 * f2 + f3 * f3 <= 0.0625) ? 1 : 0;
    CHECK(plywood_indicator_lp(spec, cov, eps, x) == periodic);
  }
}

TEST_CASE("plywood lp indicator: tiny fibres vanish, point outside rejected") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  IndicatorSpec spec = IndicatorSpec::plywood_lp(1e-9, gamma);
  const double eps = 1.0 / 16;
  Covering cov = plywood_covering(eps, 0.5, gamma);
  Rng rng(14);
  for (int s = 0; s < 500; ++s) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    CHECK(plywood_indicator_lp(spec, cov, eps, x) == 0);
  }
  CHECK_THROWS_AS(plywood_indicator_lp(spec, cov, eps, Vec3(2, 2, 2)), InvalidArgument);
}

TEST_CASE("plywood lp volume fraction approaches pi a^2") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  IndicatorSpec spec = IndicatorSpec::plywood_lp(0.25, gamma);
  const double eps = 1.0 / 32;
  Covering cov = plywood_covering(eps, 0.5, gamma);
  const long n = 1'000'000;
  Rng rng(15);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(rng.uniform01(), rng.uniform01(), rng.uniform01());
  double frac = parallel_reduce(n, [&](std::int64_t i) {
                  return static_cast<double>(plywood_indicator_lp(spec, cov, eps, pts[static_cast<std::size_t>(i)]));
                }) / static_cast<double>(n);
  CHECK(frac == doctest::Approx(M_PI / 16).epsilon(0.02));
}

TEST_CASE("plywood lp is anchor-insensitive at the volume-fraction level") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  IndicatorSpec spec = IndicatorSpec::plywood_lp(0.25, gamma);
  const double eps = 1.0 / 32;
  Covering center = plywood_covering(eps, 0.5, gamma, AnchorRule::center);
  Covering random = plywood_covering(eps, 0.5, gamma, AnchorRule::random, 99);
  const long n = 400'000;
  Rng rng(16);
  double diff = 0.0;
  for (long i = 0; i < n; ++i) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    diff += plywood_indicator_lp(spec, center, eps, x) - plywood_indicator_lp(spec, random, eps, x);
  }
  diff /= static_cast<double>(n);
  CHECK(std::abs(diff) <= 6e-3);
}

TEST_CASE("plywood lp layer periodicity in the rotated frame") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  IndicatorSpec spec = IndicatorSpec::plywood_lp(0.25, gamma);
  const double eps = 1.0 / 32;
  Covering cov = plywood_covering(eps, 0.5, gamma);
  Rng rng(17);
  int compared = 0;
  for (int s = 0; s < 3000 && compared < 500; ++s) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    const CoveringCube& cube = cov.cube_at(x);
    Mat3 Rinv = rotation(gamma.gamma(cube.anchor[2])).transpose();
    Vec3 shifted = x + eps * (Rinv * Vec3(0, 1, 0));
    if (!DomainBox::unit(3).contains(shifted)) continue;
    ++compared;
    CHECK(plywood_indicator_lp(spec, cov, eps, x) ==
          plywood_indicator_lp(spec, cov, eps, shifted));
  }
  CHECK(compared >= 400);
}

TEST_CASE("plywood np indicator: periodic reduction, axis points, fraction") {
  RotationAngleField zero = RotationAngleField::constant(0.0);
  IndicatorSpec spec0 = IndicatorSpec::plywood_np(0.25, zero);
  const double eps = 1.0 / 16;
  Rng rng(18);
  for (int s = 0; s < 2000; ++s) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    double f2 = x[1] / eps - std::round(x[1] / eps);
    double f3 = x[2] / eps - std::round(x[2] / eps);
    int periodic = (f2 * f2 + f3 * f3 <= 0.0625) ? 1 : 0;
    CHECK(plywood_indicator_np(spec0, eps, x) == periodic);
  }

  RotationAngleField gamma = RotationAngleField::default_sin();
  IndicatorSpec spec = IndicatorSpec::plywood_np(0.2, gamma);
  for (int s = 0; s < 200; ++s) {
    Vec3 k(std::floor(rng.uniform(0, 12)), std::floor(rng.uniform(0, 12)),
           std::floor(rng.uniform(0, 12)));
    Mat3 Rinv = rotation(gamma.gamma(eps * k[2])).transpose();
    Vec3 axis_point = Rinv * (eps * k);
    CHECK(plywood_indicator_np(spec, eps, axis_point) == 1);
  }

  const long n = 1'000'000;
  double frac = 0.0;
  for (long i = 0; i < n; ++i) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    frac += plywood_indicator_np(spec, 1.0 / 32, x);
  }
  frac /= static_cast<double>(n);
  CHECK(frac == doctest::Approx(M_PI * 0.04).epsilon(0.02));
}

TEST_CASE("perforation indicator") {
  auto rho_const = [](const Vec3&) { return 0.3; };
  IndicatorSpec spec = IndicatorSpec::perforation(rho_const, 0.3, 0.3);
  const double eps = 1.0 / 32;
  CoveringOptions opts;
  opts.field = TransformationField::identity();
  Covering cov = build_covering(DomainBox::unit(2), eps, 0.5, opts);

  // lattice points of each cube hit the perforation center
  const CoveringCube& cube = cov.cubes[5];
  Vec3 center = cube.shift + eps * Vec3(1, 1, 0);
  if (DomainBox::unit(2).contains(center))
    CHECK(perforation_indicator(spec, cov, eps, center) == 1);

  // constant rho: fraction = pi rho^2 in 2D
  Rng rng(19);
  const long n = 500'000;
  double frac = 0.0;
  for (long i = 0; i < n; ++i) {
    Vec3 x(rng.uniform01(), rng.uniform01(), 0.0);
    frac += perforation_indicator(spec, cov, eps, x);
  }
  frac /= static_cast<double>(n);
  CHECK(frac == doctest::Approx(M_PI * 0.09).epsilon(0.02));

  // tiny rho suppresses the perforation almost everywhere
  IndicatorSpec tiny = IndicatorSpec::perforation([](const Vec3&) { return 1e-6; }, 1e-7, 1e-5);
  double hits = 0.0;
  for (long i = 0; i < 10000; ++i) {
    Vec3 x(rng.uniform01(), rng.uniform01(), 0.0);
    hits += perforation_indicator(tiny, cov, eps, x);
  }
  CHECK(hits == 0.0);

  IndicatorSpec bad = IndicatorSpec::perforation([](const Vec3&) { return 1.7; }, 0.2, 0.4);
  CHECK_THROWS_AS(perforation_indicator(bad, cov, eps, Vec3(0.5, 0.5, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(IndicatorSpec::perforation(rho_const, 0.0, 0.4), InvalidArgument);

  // 3D: fraction = (4/3) pi rho^3
  Covering cov3 = build_covering(DomainBox::unit(3), 1.0 / 16, 0.5, opts);
  double frac3 = 0.0;
  const long n3 = 400'000;
  for (long i = 0; i < n3; ++i) {
    Vec3 x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    frac3 += perforation_indicator(spec, cov3, 1.0 / 16, x);
  }
  frac3 /= static_cast<double>(n3);
  CHECK(frac3 == doctest::Approx(4.0 / 3.0 * M_PI * 0.027).epsilon(0.03));
}

TEST_CASE("fiber shift bound") {
  CHECK(fiber_shift_bound(0.1, 1.0, Vec3::Zero(), 16) == 0.0);

  // disjoint supports: measure is exactly twice the cylinder volume
  double ratio = fiber_shift_bound(0.1, 0.8, Vec3(0.0, 0.25, 0.0), 24);
  double expected = 2.0 * M_PI * 0.1 * 0.1 * 0.8 / (0.1 * 0.8 * 0.25);
  CHECK(ratio == doctest::Approx(expected).epsilon(0.05));

  // bounded ratio as tau -> 0 over a dyadic schedule
  std::vector<double> ratios;
  for (double scale : {1.0, 0.5, 0.25})
    ratios.push_back(fiber_shift_bound(0.1, 0.8, Vec3(0.0, 0.1 * scale, 0.0), 80));
  double mean = (ratios[0] + ratios[1] + ratios[2]) / 3.0;
  for (double v : ratios) CHECK(std::abs(v - mean) <= 0.2 * mean);

  CHECK_THROWS_AS(fiber_shift_bound(0.1, 0.8, Vec3(0.0, 0.001, 0.0), 8), ResolutionError);
  try {
    fiber_shift_bound(0.1, 0.8, Vec3(0.0, 0.001, 0.0), 8);
  } catch (const ResolutionError& e) {
    CHECK(e.required_resolution >= 16);
  }
}

TEST_CASE("lp/np discrepancy") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  IndicatorSpec spec = IndicatorSpec::plywood_np(0.25, gamma);

  CHECK_THROWS_AS(lp_np_discrepancy(spec, 1.0 / 16, 0.5, 1000, 1), InvalidArgument);

  // constant gamma: zero discrepancy at every sample
  IndicatorSpec flat = IndicatorSpec::plywood_np(0.25, RotationAngleField::constant(0.9));
  DiscrepancyEstimate zero = lp_np_discrepancy(flat, 1.0 / 16, 0.8, 200'000, 2);
  CHECK(zero.measure == 0.0);

  // tiny fibres: both indicators vanish
  IndicatorSpec tiny = IndicatorSpec::plywood_np(1e-9, gamma);
  CHECK(lp_np_discrepancy(tiny, 1.0 / 16, 0.8, 50'000, 3).measure == 0.0);

  // halving eps at r = 0.8 shrinks the measure by about 2^{-(3r-2)}
  DiscrepancyEstimate d1 = lp_np_discrepancy(spec, 1.0 / 16, 0.8, 2'000'000, 4);
  DiscrepancyEstimate d2 = lp_np_discrepancy(spec, 1.0 / 32, 0.8, 2'000'000, 4);
  CHECK(d1.measure > 0.0);
  CHECK(d2.measure < d1.measure);
  double target = std::pow(2.0, -(3 * 0.8 - 2.0));
  CHECK(std::abs(d2.measure / d1.measure - target) <= 0.3 * target);
  CHECK(d1.std_error < 0.05 * d1.measure);
}
