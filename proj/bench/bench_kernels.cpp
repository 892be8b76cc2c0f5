// Serial vs OpenMP full-pass reductions on dense and sparse logistic problems.
//
//   bench_kernels --benchmark_filter=Gradient

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "seqn/dataio.hpp"
#include "seqn/kernels.hpp"
#include "seqn/logreg.hpp"
#include "seqn/rng.hpp"

namespace {

struct Instance {
  seqn::Dataset data;
  std::unique_ptr<seqn::LogRegProblem> problem;
  seqn::Vector x;
};

// range(0) rows, range(1) features, range(2) density in percent.
const Instance& instance(const benchmark::State& state) {
  static std::unique_ptr<Instance> cached;
  static std::int64_t key[3] = {-1, -1, -1};
  if (!cached || key[0] != state.range(0) || key[1] != state.range(1) || key[2] != state.range(2)) {
    seqn::SyntheticSpec spec;
    spec.rows = static_cast<std::size_t>(state.range(0));
    spec.features = static_cast<std::size_t>(state.range(1));
    spec.density = static_cast<double>(state.range(2)) / 100.0;
    seqn::Rng rng(1);
    cached = std::make_unique<Instance>();
    cached->data = seqn::make_synthetic(spec, rng);
    cached->problem = std::make_unique<seqn::LogRegProblem>(cached->data);
    cached->x.resize(spec.features);
    for (double& v : cached->x) v = 0.1 * rng.normal();
    key[0] = state.range(0);
    key[1] = state.range(1);
    key[2] = state.range(2);
  }
  return *cached;
}

template <void (*Kernel)(const seqn::FiniteSumProblem&, seqn::ConstVec, seqn::MutVec)>
void BM_Gradient(benchmark::State& state) {
  const Instance& in = instance(state);
  seqn::Vector g(in.x.size());
  for (auto _ : state) {
    Kernel(*in.problem, in.x, g);
    benchmark::DoNotOptimize(g.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <double (*Kernel)(const seqn::FiniteSumProblem&, seqn::ConstVec)>
void BM_Value(benchmark::State& state) {
  const Instance& in = instance(state);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(*in.problem, in.x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({20000, 50, 100})->Args({100000, 50, 100})->Args({50000, 20000, 1})->UseRealTime();
}

BENCHMARK_TEMPLATE(BM_Gradient, seqn::kernels::full_gradient_serial)->Apply(shapes);
BENCHMARK_TEMPLATE(BM_Gradient, seqn::kernels::full_gradient_parallel)->Apply(shapes);
BENCHMARK_TEMPLATE(BM_Value, seqn::kernels::mean_value_serial)->Apply(shapes);
BENCHMARK_TEMPLATE(BM_Value, seqn::kernels::mean_value_parallel)->Apply(shapes);

}  // namespace

BENCHMARK_MAIN();
