#include <benchmark/benchmark.h>

#include <memory>

#include "smg/dataio.hpp"
#include "smg/logistic.hpp"
#include "smg/optimizers.hpp"
#include "smg/shuffling.hpp"

namespace {

using smg::Vector;

Vector filled(std::size_t d, double v) { return Vector::Constant(static_cast<Eigen::Index>(d), v); }

void BM_SmgStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  smg::SmgStepper stepper(d, 1000, 0.5);
  Vector w = filled(d, 0.1), g = filled(d, 0.01);
  stepper.begin_epoch(1);
  for (auto _ : state) {
    stepper.step(w, g, 1e-4);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SmgStep)->Arg(100)->Arg(10000);

void BM_SsmgStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  smg::SsmgStepper stepper(d, 0.5);
  Vector w = filled(d, 0.1), g = filled(d, 0.01);
  for (auto _ : state) {
    stepper.step(w, g, 1e-4);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_SsmgStep)->Arg(100)->Arg(10000);

void BM_AdamStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  smg::AdamStepper stepper(d, 0.9, 0.999, 1e-8);
  Vector w = filled(d, 0.1), g = filled(d, 0.01);
  for (auto _ : state) {
    stepper.step(w, g, 1e-4);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_AdamStep)->Arg(100)->Arg(10000);

void BM_LogisticComponentGrad(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const smg::LogisticProblem problem(smg::synth_binary_dataset(256, d, 1, 0.8), 0.01, d);
  Vector w = filled(d, 0.01), out(static_cast<Eigen::Index>(d));
  std::size_t i = 0;
  for (auto _ : state) {
    problem.component_grad(w, i, out);
    benchmark::DoNotOptimize(out.data());
    i = (i + 1) % problem.num_components();
  }
}
BENCHMARK(BM_LogisticComponentGrad)->Arg(22)->Arg(300);

void BM_Permutation(benchmark::State& state) {
  smg::PermutationStream stream({smg::ShufflingKind::kRandomizedReshuffling, 3},
                                static_cast<std::size_t>(state.range(0)));
  std::size_t t = 1;
  for (auto _ : state) benchmark::DoNotOptimize(stream.next_epoch_permutation(t++).data());
}
BENCHMARK(BM_Permutation)->Arg(1000)->Arg(50000);

void BM_SmgEpochs(benchmark::State& state) {
  const std::size_t n = 2000, d = 50;
  const smg::LogisticProblem problem(smg::synth_binary_dataset(n, d, 1, 0.8), 0.01, d);
  const auto schedule = smg::Schedule::constant(0.5, 5);
  const smg::OptimizerConfig config{smg::Algorithm::kSmg, 0.5};
  const Vector w0 = smg::initial_point(d, 0);
  for (auto _ : state) {
    auto record = smg::run_epochs(problem, schedule, {smg::ShufflingKind::kRandomizedReshuffling, 0}, config, w0);
    benchmark::DoNotOptimize(record.final_loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(5 * n));
}
BENCHMARK(BM_SmgEpochs)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
