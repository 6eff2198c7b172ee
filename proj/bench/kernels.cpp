#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "haptix/hmm.hpp"
#include "haptix/nn.hpp"
#include "haptix/preprocess.hpp"
#include "haptix/synthgen.hpp"

using namespace haptix;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

const Dataset& data() {
  static const Dataset ds = [] {
    synth::GenConfig cfg;
    cfg.trials_per_class = 60;
    return synth::generate(cfg);
  }();
  return ds;
}

std::vector<FeatureMatrix> normalised(const FeatureSet& fs) {
  auto prepared = prepare_dataset(data(), fs);
  const auto norm = fit_norm(prepared);
  for (auto& fm : prepared) norm.apply(fm);
  return prepared;
}

void BM_Generate(benchmark::State& state) {
  synth::GenConfig cfg;
  cfg.trials_per_class = 60;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate(cfg, exec_of(state)));
}

void BM_PrepareDataset(benchmark::State& state) {
  const auto fs = FeatureSet::all();
  for (auto _ : state) benchmark::DoNotOptimize(prepare_dataset(data(), fs, {}, exec_of(state)));
}

void BM_BaumWelch(benchmark::State& state) {
  const auto train = normalised(FeatureSet::from_groups(true, false, true, false, false));
  hmm::BaumWelchOptions opts;
  opts.max_iter = 10;
  opts.tol = 0.0;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(hmm::baum_welch(train, opts));
}

void BM_TcnBatchGradient(benchmark::State& state) {
  const auto train = normalised(FeatureSet::all());
  nn::TcnShape shape;
  shape.input_channels = train.front().cols;
  const auto model = nn::TcnModel::random(shape, 0);
  std::vector<std::size_t> idx(32);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> grad(model.params().size());
  for (auto _ : state) benchmark::DoNotOptimize(nn::batch_gradient(model, train, idx, grad, exec_of(state)));
}

void BM_LstmBatchGradient(benchmark::State& state) {
  const auto train = normalised(FeatureSet::all());
  nn::LstmShape shape;
  shape.input_channels = train.front().cols;
  const auto model = nn::LstmModel::random(shape, 0);
  std::vector<std::size_t> idx(32);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> grad(model.params().size());
  for (auto _ : state) benchmark::DoNotOptimize(nn::batch_gradient(model, train, idx, grad, exec_of(state)));
}

}  // namespace

// Argument 0 runs the serial reference, 1 the OpenMP path.
BENCHMARK(BM_Generate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PrepareDataset)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BaumWelch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TcnBatchGradient)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LstmBatchGradient)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
