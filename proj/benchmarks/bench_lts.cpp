#include <benchmark/benchmark.h>

#include <cmath>

#include "lphom/lts.hpp"
#include "lphom/microstructure.hpp"

using namespace lphom;

namespace {

void BM_eval_Leps_worked_example(benchmark::State& state) {
  TransformationField D = TransformationField::exp_1d();
  const double eps = 1.0 / 1024;
  CoveringOptions opts;
  opts.field = D;
  Covering cov = build_covering(DomainBox::unit(1), eps, 0.5, opts);
  SeparableFunction psi;
  psi.value = [](const Vec3& x, const Vec3& y) { return x[0] + std::sin(2 * M_PI * y[0]); };
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-7;
    if (x >= 1.0) x -= 1.0;
    benchmark::DoNotOptimize(eval_Leps(psi, D, cov, eps, Vec3(x, 0, 0)));
  }
}
BENCHMARK(BM_eval_Leps_worked_example);

void BM_plywood_np_indicator(benchmark::State& state) {
  IndicatorSpec spec = IndicatorSpec::plywood_np(0.25, RotationAngleField::default_sin());
  const double eps = 1.0 / 64;
  double t = 0.0;
  for (auto _ : state) {
    t += 0.618033988749895;
    if (t >= 1.0) t -= 1.0;
    benchmark::DoNotOptimize(plywood_indicator_np(spec, eps, Vec3(t, 1.0 - t, 0.5 * t)));
  }
}
BENCHMARK(BM_plywood_np_indicator);

void BM_frozen_mean_measurement(benchmark::State& state) {
  const double eps = 1.0 / state.range(0);
  RotationAngleField gamma = RotationAngleField::default_sin();
  TransformationField D = TransformationField::rotation_2d(gamma);
  SeparableFunction coeff;
  coeff.value = [](const Vec3&, const Vec3& y) {
    double f1 = y[0] - 0.5, f2 = y[1] - 0.5;
    return (f1 * f1 + f2 * f2 <= 0.0625) ? 1.0 : 2.0;
  };
  coeff.smooth_in_y = false;
  coeff.x_independent = true;
  CoveringOptions opts;
  opts.field = D;
  Covering cov = build_covering(DomainBox::unit(2), eps, 0.5, opts);
  QuadratureGrid grid = QuadratureGrid::resolving(DomainBox::unit(2), eps);
  for (auto _ : state) {
    double v = grid.integrate(
        [&](const Vec3& x) { return eval_Leps0(coeff, D, cov, eps, x); });
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_frozen_mean_measurement)->Arg(16)->Arg(32);

}  // namespace
