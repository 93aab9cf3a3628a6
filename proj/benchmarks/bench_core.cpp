#include <benchmark/benchmark.h>

#include "abspec/analysis.hpp"
#include "abspec/assembly.hpp"
#include "abspec/eigensolve.hpp"
#include "abspec/mesh.hpp"
#include "abspec/spectral.hpp"

using namespace abspec;

static void BM_Triangulate(benchmark::State& state) {
  Domain disk = Domain::unit_disk();
  Pole pole({0.3, 0.2});
  Cut cut = branch_cut(disk, pole);
  MeshOptions opt;
  opt.h = 1.0 / state.range(0);
  for (auto _ : state) {
    Mesh m = triangulate(disk, opt, &pole, {cut});
    benchmark::DoNotOptimize(m.triangle_count());
  }
}
BENCHMARK(BM_Triangulate)->Arg(10)->Arg(20)->Arg(40);

static void BM_AssembleP2(benchmark::State& state) {
  Domain sq = Domain::unit_square();
  MeshOptions opt;
  opt.h = 1.0 / state.range(0);
  Mesh m = triangulate(sq, opt);
  for (auto _ : state) {
    FemSystem sys = assemble(m, 2);
    benchmark::DoNotOptimize(sys.K.dimension());
  }
  state.SetItemsProcessed(state.iterations() * m.triangle_count());
}
BENCHMARK(BM_AssembleP2)->Arg(20)->Arg(40);

static void BM_SmallestEigenpairs(benchmark::State& state) {
  Domain sq = Domain::unit_square();
  MeshOptions opt;
  opt.h = 1.0 / state.range(0);
  Mesh m = triangulate(sq, opt);
  FemSystem sys = assemble(m, 2);
  ReducedSystem red = reduce(sys);
  for (auto _ : state) {
    auto pairs = smallest_eigenpairs(red.K, red.M, 4);
    benchmark::DoNotOptimize(pairs[0].value);
  }
}
BENCHMARK(BM_SmallestEigenpairs)->Arg(20)->Arg(40);

static void BM_MagneticSolve(benchmark::State& state) {
  Domain sq = Domain::unit_square();
  SolveOptions opt;
  opt.h = 1.0 / state.range(0);
  for (auto _ : state) {
    MagneticSolution sol = magnetic_spectrum(sq, Pole({0.5, 0.5}), opt, 4);
    benchmark::DoNotOptimize(sol.pairs[0].value);
  }
}
BENCHMARK(BM_MagneticSolve)->Arg(15)->Arg(30);

BENCHMARK_MAIN();
