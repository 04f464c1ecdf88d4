#include <benchmark/benchmark.h>

#include "lphom/cell.hpp"

using namespace lphom;

namespace {

void BM_cell_solve_elastic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Tensor4 E1 = Tensor4::isotropic(2.0, 1.5);
  Tensor4 E2 = Tensor4::isotropic(1.0, 0.5);
  PeriodicCellGrid grid = build_cell_coefficient(0.25, E1, E2, n);
  for (auto _ : state) {
    CorrectorSet cs = solve_cell_elastic(grid, 0.6);
    benchmark::DoNotOptimize(assemble_Ahom(grid, 0.6, cs));
  }
}
BENCHMARK(BM_cell_solve_elastic)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_cell_solve_scalar(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PeriodicCellGrid grid = build_cell_scalar(
      [](double y1, double y2) { return (y1 < 0.5) == (y2 < 0.5) ? 1.0 : 4.0; }, n);
  for (auto _ : state) {
    ScalarCorrectorSet cs = solve_cell_scalar(grid);
    benchmark::DoNotOptimize(assemble_scalar_hom(grid, cs));
  }
}
BENCHMARK(BM_cell_solve_scalar)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
