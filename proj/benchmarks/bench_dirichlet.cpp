#include <benchmark/benchmark.h>

#include <vector>

#include "cdl/dirichlet.hpp"
#include "cdl/recovery.hpp"
#include "cdl/rng.hpp"

namespace {

cdl::DirichletParams make_params(int c, cdl::RandomStream& rng) {
  std::vector<double> alpha(c);
  for (double& a : alpha) a = rng.uniform(0.5, 12.0);
  return cdl::DirichletParams(alpha);
}

cdl::LabelDistribution make_target(int c, cdl::RandomStream& rng) {
  std::vector<double> raw(c);
  for (double& v : raw) v = rng.gamma(1.0);
  return cdl::normalize(raw);
}

void BM_AmseLoss(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  cdl::RandomStream rng(7);
  const cdl::DirichletParams params = make_params(c, rng);
  const cdl::LabelDistribution y = make_target(c, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::amse_loss(params, y).total);
  }
}
BENCHMARK(BM_AmseLoss)->Arg(4)->Arg(16)->Arg(64);

void BM_AmseGradient(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  cdl::RandomStream rng(7);
  const cdl::DirichletParams params = make_params(c, rng);
  const cdl::LabelDistribution y = make_target(c, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::amse_gradient(params, y));
  }
}
BENCHMARK(BM_AmseGradient)->Arg(4)->Arg(16)->Arg(64);

void BM_DirichletSample(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  cdl::RandomStream rng(7);
  const cdl::DirichletParams params = make_params(c, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::dirichlet_sample(params, rng, 1024));
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_DirichletSample)->Arg(4)->Arg(16);

void BM_Recover(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  cdl::RandomStream rng(7);
  std::vector<double> e(c);
  for (double& v : e) v = rng.uniform(0.0, 20.0);
  const cdl::EvidenceVector evidence(e);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::recover(evidence));
  }
}
BENCHMARK(BM_Recover)->Arg(4)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
