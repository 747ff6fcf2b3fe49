#include <benchmark/benchmark.h>

#include "occlab/brownian.hpp"
#include "occlab/interlacement.hpp"
#include "occlab/transport.hpp"

using namespace occlab;

namespace {

WeightedAtoms random_atoms(std::size_t n, std::size_t d, Rng& rng) {
  WeightedAtoms mu(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform() - 0.5;
    mu.add(x, 1.0);
  }
  return mu;
}

}  // namespace

static void BM_NetworkSimplex(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  Rng rng(SeedSpec{1, 0});
  TransportProblem pb{random_atoms(n, 3, rng), random_atoms(n, 3, rng), 0.25};
  for (auto _ : st) benchmark::DoNotOptimize(wasserstein_exact(pb).first.cost);
  st.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_NetworkSimplex)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_EntropicSolver(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  Rng rng(SeedSpec{2, 0});
  TransportProblem pb{random_atoms(n, 3, rng), random_atoms(n, 3, rng), 0.25};
  EntropicOptions opt;
  opt.tol = 1e-4;
  for (auto _ : st) benchmark::DoNotOptimize(wasserstein_entropic(pb, opt).cost);
}
BENCHMARK(BM_EntropicSolver)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_TorusPath(benchmark::State& st) {
  const double T = static_cast<double>(st.range(0));
  const double dt = dt_for_scale(1.0 / 16);
  std::uint64_t k = 0;
  for (auto _ : st) {
    auto path = sample_bm_path(Point{0, 0, 0}, T, dt, Space::Torus, SeedSpec{3, k++});
    benchmark::DoNotOptimize(path.positions.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(T / dt));
}
BENCHMARK(BM_TorusPath)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_InterlacementUnitBall(benchmark::State& st) {
  const auto law = EntranceLaw::ball(Domain::ball(Point{0, 0, 0}, 1.0));
  InterlacementOptions opt;
  opt.mass_only = true;
  std::uint64_t k = 0;
  for (auto _ : st) benchmark::DoNotOptimize(sample_fixed_n(law, 16, opt, SeedSpec{4, k++}).mass);
  st.SetItemsProcessed(st.iterations() * 16);
}
BENCHMARK(BM_InterlacementUnitBall)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
