#include <benchmark/benchmark.h>

#include "maxent/maxent.hpp"

namespace {

using namespace maxent;

ObservableFamily family(int n) {
  return normalize_family(build_family(FamilyKind::Local1D, n, 100));
}

RealVector point(std::size_t m) {
  Rng rng(1);
  RealVector x(static_cast<Index>(m));
  for (auto& v : x) v = rng.normal();
  return x;
}

void BM_EigHerm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto obs = family(n);
  const auto h = obs.combine(point(obs.size()));
  for (auto _ : state) benchmark::DoNotOptimize(eig_herm(h));
  state.SetLabel(std::to_string(h.dim()) + "x" + std::to_string(h.dim()));
}
BENCHMARK(BM_EigHerm)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_GibbsMoments(benchmark::State& state) {
  const auto obs = family(static_cast<int>(state.range(0)));
  const RealVector x = point(obs.size());
  for (auto _ : state) benchmark::DoNotOptimize(gibbs_moments(x, obs));
}
BENCHMARK(BM_GibbsMoments)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_Snapshot(benchmark::State& state) {
  const auto obs = family(static_cast<int>(state.range(0)));
  const RealVector x = point(obs.size());
  for (auto _ : state) benchmark::DoNotOptimize(snapshot(x, obs));
}
BENCHMARK(BM_Snapshot)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_Hessian(benchmark::State& state) {
  const auto obs = family(static_cast<int>(state.range(0)));
  const auto snap = snapshot(point(obs.size()), obs);
  for (auto _ : state) benchmark::DoNotOptimize(hessian(snap, obs));
}
BENCHMARK(BM_Hessian)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_QisRun(benchmark::State& state) {
  const auto fam = build_family(FamilyKind::Ising, static_cast<int>(state.range(0)), 100);
  const auto inst = make_instance(fam, std::nullopt, qubit_normalized_beta(fam, 1.0));
  SolverConfig cfg;
  cfg.tol = 1e-7;
  cfg.record_wall_time = false;
  for (auto _ : state) benchmark::DoNotOptimize(run(inst, cfg));
}
BENCHMARK(BM_QisRun)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
