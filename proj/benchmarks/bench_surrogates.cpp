// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "pckrig/kriging.hpp"
#include "pckrig/pce.hpp"
#include "pckrig/pck.hpp"
#include "pckrig/testfunctions.hpp"

using namespace pckrig;

namespace {

ExperimentalDesign ishigami(std::size_t n, std::uint64_t seed = 1) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  return f.evaluate(lhs_sample(f.input, n, seed));
}

void BM_LhsSample(benchmark::State& state) {
  const auto in = InputModel::iid(20, MarginalDistribution::uniform(0.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(lhs_sample(in, static_cast<std::size_t>(state.range(0)), 3));
}
BENCHMARK(BM_LhsSample)->Arg(128)->Arg(1024);

void BM_IndexSet(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_index_set(3, static_cast<int>(state.range(0)), 0.75));
}
BENCHMARK(BM_IndexSet)->Arg(8)->Arg(14)->Arg(20);

void BM_FitLar(benchmark::State& state) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami(static_cast<std::size_t>(state.range(0)));
  const auto cand = build_index_set(3, 14, 0.75);
  for (auto _ : state) benchmark::DoNotOptimize(fit_lar(cand, d, f.input));
}
BENCHMARK(BM_FitLar)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_AdaptivePce(benchmark::State& state) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_pce_adaptive(d, f.input));
}
BENCHMARK(BM_AdaptivePce)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_NegLogMl(benchmark::State& state) {
  const auto d = ishigami(static_cast<std::size_t>(state.range(0)));
  const Vector log_ell = Vector::Zero(3);
  const auto trend = TrendBasis::constant();
  for (auto _ : state) benchmark::DoNotOptimize(neg_log_ml(log_ell, KernelKind::Matern52, 2.5, trend, d));
}
BENCHMARK(BM_NegLogMl)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Calibrate(benchmark::State& state) {
  const auto d = ishigami(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(TrendBasis::constant(), KernelKind::Matern52, 2.5, d));
}
BENCHMARK(BM_Calibrate)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_KrigingPredict(benchmark::State& state) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami(128);
  const auto k = KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Matern52, Vector::Constant(3, 1.0)), d);
  const auto pts = mc_sample(f.input, static_cast<std::size_t>(state.range(0)), 2).points;
  for (auto _ : state) benchmark::DoNotOptimize(k.predict(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KrigingPredict)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_KrigingLoo(benchmark::State& state) {
  const auto d = ishigami(static_cast<std::size_t>(state.range(0)));
  const auto k = KrigingModel::fit(TrendBasis::constant(), Kernel(KernelKind::Matern52, Vector::Constant(3, 1.0)), d);
  for (auto _ : state) benchmark::DoNotOptimize(k.loo());
}
BENCHMARK(BM_KrigingLoo)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_FitSpc(benchmark::State& state) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_spc(d, f.input));
}
BENCHMARK(BM_FitSpc)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FitOpc(benchmark::State& state) {
  const auto f = make_benchmark(BenchmarkId::Ishigami);
  const auto d = ishigami(32);
  PckOptions opt;
  opt.opc_cap = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_opc(d, f.input, opt));
}
BENCHMARK(BM_FitOpc)->Arg(8)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
