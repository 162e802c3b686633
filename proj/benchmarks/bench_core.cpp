#include <benchmark/benchmark.h>

#include <random>

#include "sclab/geometry_assembly.hpp"
#include "sclab/greville_topology.hpp"
#include "sclab/hierarchy.hpp"
#include "sclab/tensor_complex.hpp"
#include "sclab/univariate.hpp"

namespace {

using namespace sclab;

BoolGrid center_block(int n, int margin) {
  BoolGrid m(n, n);
  for (int y = margin; y < n - margin; ++y)
    for (int x = margin; x < n - margin; ++x) m.set(x, y);
  return m;
}

void BM_EvalBasis(benchmark::State& state) {
  const KnotVector kv = KnotVector::open_uniform(static_cast<int>(state.range(0)), 64);
  std::vector<double> v;
  double x = 0.0123;
  for (auto _ : state) {
    kv.evaluate_basis(x, v);
    benchmark::DoNotOptimize(v.data());
    x += 0.00137;
    if (x >= 1) x -= 1;
  }
}
BENCHMARK(BM_EvalBasis)->Arg(2)->Arg(4);

void BM_TwoScale(benchmark::State& state) {
  const KnotVector kv = KnotVector::open_uniform(static_cast<int>(state.range(0)), 64);
  const KnotVector fine = kv.dyadic_refine();
  for (auto _ : state) {
    const Eigen::MatrixXd m = twoscale_matrix(kv, fine);
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_TwoScale)->Arg(2)->Arg(4);

void BM_SelectActive(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LevelStack stack({3, 3}, {n, n},
                         {center_block(n, n / 4), center_block(2 * n, (2 * n) / 3)});
  for (auto _ : state) {
    const HierarchicalSpace w(stack, 1);
    benchmark::DoNotOptimize(w.dim());
  }
}
BENCHMARK(BM_SelectActive)->Arg(8)->Arg(16);

void BM_MassAssembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LevelStack stack({3, 3}, {n, n}, {center_block(n, n / 4)});
  const HierarchicalSpace w(stack, 1);
  const GeometryMap geom = GeometryMap::scaling(2.0, 0.5);
  for (auto _ : state) {
    const SpMat m = assemble_mass(w, geom);
    benchmark::DoNotOptimize(m.nonZeros());
  }
}
BENCHMARK(BM_MassAssembly)->Arg(8)->Arg(16);

void BM_RegionTopology(benchmark::State& state) {
  const int n = 256;
  BoolGrid cells(n, n);
  std::mt19937 rng(99);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (rng() % 3) cells.set(x, y);
  for (auto _ : state) {
    const RegionTopology t = region_topology(cells);
    benchmark::DoNotOptimize(t.components);
  }
}
BENCHMARK(BM_RegionTopology);

void BM_ExactRank(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LevelStack stack({3, 3}, {n, n}, {});
  for (auto _ : state) {
    const CohomologyResult r = cohomology_dims_rank(stack);
    benchmark::DoNotOptimize(r.ranks[0]);
  }
}
BENCHMARK(BM_ExactRank)->Arg(8)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
