#include <doctest.h>

#include <cmath>
#include <set>

#include "lphom/covering.hpp"
#include "lphom/parallel.hpp"

using namespace lphom;

TEST_CASE("covering counts on the unit square") {
  Covering cov = build_covering(DomainBox::unit(2), 1.0 / 16, 0.5);
  CHECK(cov.side == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(cov.N_eps == 16);
  CHECK(cov.N_tilde_eps == 16);
  CHECK(cov.remainder_measure == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("covering counts on a clipped square") {
  DomainBox dom(2, Vec3::Zero(), Vec3(0.9, 0.9, 0.0));
  Covering cov = build_covering(dom, 1.0 / 16, 0.5);
  CHECK(cov.N_eps == 16);
  CHECK(cov.N_tilde_eps == 9);
  CHECK(cov.remainder_measure == doctest::Approx(0.81 - 9.0 / 16).epsilon(1e-12));
}

TEST_CASE("cube count grows monotonically as eps shrinks") {
  const DomainBox dom = DomainBox::unit(1);
  long prev = 0;
  for (int k = 4; k <= 10; ++k) {
    Covering cov = build_covering(dom, std::pow(2.0, -k), 0.5);
    CHECK(cov.N_eps >= prev);
    prev = cov.N_eps;
  }
  // halving eps multiplies the count by about 2^r
  Covering c1 = build_covering(dom, 1.0 / 256, 0.5);
  Covering c2 = build_covering(dom, 1.0 / 512, 0.5);
  double ratio = static_cast<double>(c2.N_eps) / static_cast<double>(c1.N_eps);
  CHECK(ratio == doctest::Approx(std::pow(2.0, 0.5)).epsilon(0.15));
}

TEST_CASE("covering rejects bad parameters") {
  CHECK_THROWS_AS(build_covering(DomainBox::unit(2), 0.25, 1.2), InvalidArgument);
  CHECK_THROWS_AS(build_covering(DomainBox::unit(2), 0.25, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_covering(DomainBox::unit(2), 0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(build_covering(DomainBox::unit(2), -1.0, 0.5), InvalidArgument);
  // eps^r not smaller than the domain side
  DomainBox small(2, Vec3::Zero(), Vec3(0.5, 0.5, 0.0));
  CHECK_THROWS_AS(build_covering(small, 0.9, 0.5), InvalidArgument);
  CHECK_THROWS_AS(DomainBox(2, Vec3(0, 0, 0), Vec3(1, 0, 0)), InvalidArgument);
}

TEST_CASE("coverage and disjointness") {
  DomainBox dom(2, Vec3::Zero(), Vec3(0.93, 0.71, 0.0));
  Covering cov = build_covering(dom, 1.0 / 32, 0.55);

  std::set<std::pair<int, int>> indices;
  for (const CoveringCube& c : cov.cubes) {
    bool fresh = indices.insert({c.index[0], c.index[1]}).second;
    CHECK(fresh);
    CHECK(dom.contains(c.anchor));
    CHECK(c.anchor[0] >= c.corner[0]);
    CHECK(c.anchor[0] <= c.corner[0] + cov.side);
  }

  Rng rng(7);
  for (int s = 0; s < 10000; ++s) {
    Vec3 x(rng.uniform(0.0, 0.93), rng.uniform(0.0, 0.71), 0.0);
    CHECK(cov.find_cube(x) >= 0);
  }
}

TEST_CASE("count and remainder bounds along a schedule") {
  DomainBox dom(2, Vec3::Zero(), Vec3(0.9, 0.9, 0.0));
  double max_count_ratio = 0.0, max_rem_ratio = 0.0;
  for (int k = 4; k <= 10; ++k) {
    double eps = std::pow(2.0, -k);
    Covering cov = build_covering(dom, eps, 0.5);
    max_count_ratio = std::max(
        max_count_ratio, static_cast<double>(cov.N_eps) * std::pow(cov.side, 2) / dom.volume());
    max_rem_ratio = std::max(max_rem_ratio, cov.remainder_measure / cov.side);
  }
  CHECK(max_count_ratio <= 2.0);   // N eps^{rd} <= |Omega| + C
  CHECK(max_rem_ratio <= 4.0 * 0.9 * 2);  // |K^eps| <= C eps^r
}

TEST_CASE("cell covering with identity transformation tiles exactly") {
  for (int d = 1; d <= 2; ++d) {
    Covering cov = build_covering(DomainBox::unit(d), 1.0 / 16, 0.5,
                                  {AnchorRule::center, 0, TransformationField::identity(), false});
    CellCovering cc = build_cell_covering(cov, 0, TransformationField::identity());
    CHECK(cc.I_tilde_n_eps == static_cast<long>(std::pow(4, d)));
    CHECK(cc.boundary_band_measure == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cc.I_n_eps >= cc.I_tilde_n_eps);
  }
}

TEST_CASE("cell covering bounds under rotation") {
  RotationAngleField gamma = RotationAngleField::default_sin();
  TransformationField D = TransformationField::rotation_2d(gamma);
  double max_In_ratio = 0.0, max_band_ratio = 0.0;
  const double r = 0.5;
  for (int k = 4; k <= 8; ++k) {
    double eps = std::pow(2.0, -k);
    Covering cov = build_covering(DomainBox::unit(2), eps, r, {AnchorRule::center, 0, D, false});
    CellCovering cc = build_cell_covering(cov, static_cast<int>(cov.cubes.size()) / 2, D);
    // I_n <= C eps^{d(r-1)}, |M_n| <= C eps^{(d-1)r+1}
    max_In_ratio = std::max(max_In_ratio,
                            static_cast<double>(cc.I_n_eps) * std::pow(eps, 2.0 * (1.0 - r)));
    max_band_ratio = std::max(max_band_ratio, cc.boundary_band_measure / std::pow(eps, r + 1.0));
  }
  CHECK(max_In_ratio <= 4.0);
  CHECK(max_band_ratio <= 12.0);
}

TEST_CASE("cell covering rejects singular transformations") {
  Covering cov = build_covering(DomainBox::unit(2), 1.0 / 16, 0.5);
  TransformationField bad = TransformationField::identity();
  bad.D = [](const Vec3&) {
    Mat3 m = Mat3::Identity();
    m(0, 0) = 0.0;
    return m;
  };
  CHECK_THROWS_AS(build_cell_covering(cov, 0, bad), InvalidArgument);
  CHECK_THROWS_AS(build_cell_covering(cov, 9999, TransformationField::identity()), InvalidArgument);
}

TEST_CASE("mollified cutoff plateau, support and bounds") {
  const double eps = 1.0 / 256, r = 0.5, rho = 0.8;
  Covering cov = build_covering(DomainBox::unit(2), eps, r);
  MollifiedCutoff cut(cov, rho);

  // interior cube center sits on the plateau
  int interior = -1;
  for (std::size_t i = 0; i < cov.cubes.size(); ++i)
    if (cov.cubes[i].interior && cov.cubes[i].index[0] == 4 && cov.cubes[i].index[1] == 4)
      interior = static_cast<int>(i);
  REQUIRE(interior >= 0);
  Vec3 center = cov.cubes[static_cast<std::size_t>(interior)].corner + 0.5 * Vec3(cov.side, cov.side, 0.0);
  CHECK(cut.value(center, interior) == doctest::Approx(1.0).epsilon(1e-12));

  // vanishes on faces and outside
  Vec3 face = cov.cubes[static_cast<std::size_t>(interior)].corner + Vec3(0.0, 0.5 * cov.side, 0.0);
  CHECK(cut.value(face, interior) == 0.0);
  CHECK(cut.value(Vec3(-0.5, -0.5, 0.0)) == 0.0);

  // values in [0,1] (disjoint supports make the pointwise sum a single term)
  Rng rng(3);
  for (int s = 0; s < 10000; ++s) {
    Vec3 x(rng.uniform01(), rng.uniform01(), 0.0);
    double v = cut.value(x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("mollified cutoff gradient and hessian scale like eps^-rho powers") {
  const double r = 0.5, rho = 0.75;
  const DomainBox dom = DomainBox::unit(1);
  double lo = 1e300, hi = 0.0, hess_hi = 0.0;
  for (int k = 6; k <= 10; ++k) {
    double eps = std::pow(2.0, -k);
    Covering cov = build_covering(dom, eps, r);
    MollifiedCutoff cut(cov, rho);
    int mid = cov.find_cube(Vec3(0.5, 0.0, 0.0));
    const CoveringCube& cube = cov.cubes[static_cast<std::size_t>(mid)];
    double gmax = 0.0, hmax = 0.0;
    for (int s = 0; s <= 400; ++s) {
      Vec3 x = cube.corner + Vec3(cov.side * s / 400.0, 0.0, 0.0);
      gmax = std::max(gmax, cut.gradient(x).norm());
      hmax = std::max(hmax, cut.hessian_norm(x));
    }
    double scaled = gmax * std::pow(eps, rho);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
    hess_hi = std::max(hess_hi, hmax * std::pow(eps, 2 * rho));
  }
  CHECK(hi > 0.0);
  CHECK(hi / lo <= 3.0);  // ||grad phi||_inf ~ C eps^{-rho}
  CHECK(hess_hi <= 50.0);
}

TEST_CASE("mollified cutoff L2 distance to indicators decays like eps^{(rho-r)/2}") {
  // |phi - chi| <= 1 lives on bands of total measure ~ eps^{rho-r}, so its
  // L2 norm scales with the square root of that measure.
  const double r = 0.5, rho = 0.8;
  const DomainBox dom = DomainBox::unit(1);
  double max_ratio = 0.0, min_ratio = 1e300, prev = 1e300;
  for (int k = 6; k <= 10; k += 2) {
    double eps = std::pow(2.0, -k);
    Covering cov = build_covering(dom, eps, r);
    MollifiedCutoff cut(cov, rho);
    double dist = cut.l2_distance_to_indicators(static_cast<int>(20.0 / std::pow(eps, rho)));
    CHECK(dist < prev);
    prev = dist;
    double ratio = dist / std::pow(eps, 0.5 * (rho - r));
    max_ratio = std::max(max_ratio, ratio);
    min_ratio = std::min(min_ratio, ratio);
  }
  CHECK(max_ratio <= 3.0);
  CHECK(max_ratio / min_ratio <= 2.0);
}

TEST_CASE("mollified cutoff rejects degenerate exponents") {
  Covering cov = build_covering(DomainBox::unit(2), 1.0 / 64, 0.5);
  CHECK_THROWS_AS(MollifiedCutoff(cov, 0.5), InvalidArgument);
  CHECK_THROWS_AS(MollifiedCutoff(cov, 0.4), InvalidArgument);
  CHECK_THROWS_AS(MollifiedCutoff(cov, 1.0), InvalidArgument);
  // eps^rho below half the cube side fails for rho close to r
  Covering coarse = build_covering(DomainBox::unit(2), 0.49, 0.5);
  CHECK_THROWS_AS(MollifiedCutoff(coarse, 0.51), InvalidArgument);
}

TEST_CASE("covering json round trip") {
  DomainBox dom(2, Vec3::Zero(), Vec3(0.9, 0.7, 0.0));
  Covering cov = build_covering(dom, 1.0 / 32, 0.5,
                                {AnchorRule::center, 0, TransformationField::identity(), false});
  std::string text = cov.to_json();
  Covering back = Covering::from_json(text);
  CHECK(back.N_eps == cov.N_eps);
  CHECK(back.N_tilde_eps == cov.N_tilde_eps);
  CHECK(back.remainder_measure == doctest::Approx(cov.remainder_measure));
  Rng rng(11);
  for (int s = 0; s < 200; ++s) {
    Vec3 x(rng.uniform(0.0, 0.9), rng.uniform(0.0, 0.7), 0.0);
    CHECK(back.find_cube(x) == cov.find_cube(x));
  }
  CHECK(back.to_json() == text);
}
