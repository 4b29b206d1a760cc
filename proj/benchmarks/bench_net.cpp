#include <benchmark/benchmark.h>

#include <vector>

#include "cdl/confidence_net.hpp"
#include "cdl/data_io.hpp"
#include "cdl/dirichlet.hpp"
#include "cdl/rng.hpp"

namespace {

struct Fixture {
  cdl::ConfidenceModel model;
  std::vector<double> x;
  cdl::LabelDistribution y;
};

Fixture make_fixture(int m, int c) {
  cdl::RandomStream rng(11);
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> ys;
  for (int i = 0; i < 32; ++i) {
    std::vector<double> x(m);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<double> raw(c);
    for (double& v : raw) v = rng.gamma(1.0);
    xs.push_back(x);
    ys.push_back(cdl::normalize(raw).values());
  }
  cdl::Dataset data{cdl::Matrix::from_rows(xs), cdl::Matrix::from_rows(ys),
                    cdl::TargetKind::kLabel, c, {}, {}};
  cdl::NetworkConfig cfg;
  cfg.input_dim = m;
  cfg.output_dim = c;
  cfg.epochs = 1;
  cfg.seed = 11;
  cdl::ConfidenceModel model = cdl::train(data, cfg);
  return Fixture{std::move(model), xs[0], cdl::LabelDistribution(ys[0])};
}

void BM_Forward(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::forward(f.model, f.x));
  }
}
BENCHMARK(BM_Forward)->Args({24, 6})->Args({64, 16});

void BM_Backward(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::backward(f.model, f.x, f.y));
  }
}
BENCHMARK(BM_Backward)->Args({24, 6})->Args({64, 16});

void BM_TrainEpoch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const cdl::SynthData synth = cdl::synth_generate(n, 24, 6, 13);
  const cdl::Dataset data{synth.dataset.features, synth.apparent,
                          cdl::TargetKind::kLabel, 6, {}, {}};
  cdl::NetworkConfig cfg;
  cfg.input_dim = 24;
  cfg.output_dim = 6;
  cfg.epochs = 1;
  cfg.seed = 13;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdl::train(data, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TrainEpoch)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
