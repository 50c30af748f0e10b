#include <benchmark/benchmark.h>

#include <random>

#include "saomre/estimator.hpp"

using namespace saomre;

namespace {

PanelData panel(std::size_t n) {
  std::mt19937_64 g(1);
  std::bernoulli_distribution coin(0.1), flip(0.05);
  Network w1(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(g)) w1.set_tie(i, j, true);
  Network w2 = w1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && flip(g)) w2.toggle(i, j);
  return make_panel(w1, w2, {});
}

ModelSpec spec() {
  ModelSpec m;
  m.fixed_effects = {{EffectKind::OutDegree, {}}, {EffectKind::Reciprocity, {}}, {EffectKind::TransitiveTriplets, {}}};
  m.random_effects = {{EffectKind::OutDegree, {}}};
  return m;
}

ParameterPoint point() {
  ParameterPoint pp;
  pp.lambda = 5.0;
  pp.beta = Eigen::Vector3d(-2.0, 2.0, 0.2);
  pp.sigma = Eigen::MatrixXd::Constant(1, 1, 0.5);
  return pp;
}

void phase3_run(benchmark::State& state, Execution mode) {
  const PanelData p = panel(static_cast<std::size_t>(state.range(0)));
  Phase3Options opt;
  opt.execution = mode;
  for (auto _ : state) benchmark::DoNotOptimize(phase3(spec(), p, point(), 500, 7, opt).m_bar);
  state.counters["threads"] = mode == Execution::Parallel ? worker_count() : 1;
}

void BM_Phase3Serial(benchmark::State& s) { phase3_run(s, Execution::Serial); }
void BM_Phase3Parallel(benchmark::State& s) { phase3_run(s, Execution::Parallel); }

void phase1_run(benchmark::State& state, Execution mode) {
  const PanelData p = panel(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(phase1_precondition(spec(), p, point(), 200, 3, 0.2, 0.2, mode).D0);
}

void BM_Phase1Serial(benchmark::State& s) { phase1_run(s, Execution::Serial); }
void BM_Phase1Parallel(benchmark::State& s) { phase1_run(s, Execution::Parallel); }

// bitset kernel against the whole-statistic reference for one ministep distribution
void BM_KernelProbabilities(benchmark::State& state) {
  const PanelData p = panel(static_cast<std::size_t>(state.range(0)));
  const Simulator sim(spec(), {});
  const BitNetwork x(p.wave1);
  auto ws = sim.make_workspace(p.n_actors());
  const Eigen::RowVectorXd b = Eigen::RowVectorXd::Constant(1, 0.3);
  std::size_t i = 0;
  for (auto _ : state) {
    sim.kernel_probabilities(x, i, point(), b, ws);
    benchmark::DoNotOptimize(ws.probs.data());
    i = (i + 1) % p.n_actors();
  }
}

void BM_ReferenceProbabilities(benchmark::State& state) {
  const PanelData p = panel(static_cast<std::size_t>(state.range(0)));
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 0.3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(choice_probabilities(p.wave1, i, point(), b, spec(), {}));
    i = (i + 1) % p.n_actors();
  }
}

}  // namespace

BENCHMARK(BM_Phase3Serial)->Arg(39)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Phase3Parallel)->Arg(39)->Arg(100)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Phase1Serial)->Arg(39)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Phase1Parallel)->Arg(39)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KernelProbabilities)->Arg(39)->Arg(100);
BENCHMARK(BM_ReferenceProbabilities)->Arg(39)->Arg(100);

BENCHMARK_MAIN();
