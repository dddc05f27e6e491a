// Serial reference vs OpenMP production kernels at a few batch sizes.
// Build: cmake --build build --target snnforge_bench
// Run:   ./build/snnforge_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <vector>

#include "snnforge/kernels.hpp"
#include "snnforge/rng.hpp"

using namespace snnforge;

namespace {

Dataset make_dataset(std::size_t rows, std::size_t cols, Rng& rng) {
  Dataset d;
  d.name = "bench";
  for (std::size_t c = 0; c < cols; ++c) {
    d.feature_names.push_back("f" + std::to_string(c));
  }
  d.features.resize(rows * cols);
  d.labels.resize(rows);
  for (auto& v : d.features) v = rng.unit();
  for (std::size_t r = 0; r < rows; ++r) d.labels[r] = rng.raw() % 2;
  return d;
}

SnnModel make_model(std::size_t n, std::size_t m, Rng& rng) {
  SnnModel model = SnnModel::zeros(n, m);
  for (auto& w : model.hidden_weights) w = rng.uniform(-1, 1);
  for (auto& b : model.hidden_biases) b = rng.uniform(-1, 1);
  for (auto& w : model.output_weights) w = rng.uniform(-1, 1);
  model.output_bias = rng.uniform(-1, 1);
  return model;
}

void bm_outputs_serial(benchmark::State& state) {
  Rng rng(1);
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_dataset(rows, 9, rng);
  const SnnModel model = make_model(9, 4, rng);
  std::vector<double> out;
  for (auto _ : state) {
    batch_outputs_serial(model, data, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rows));
}

void bm_outputs_omp(benchmark::State& state) {
  Rng rng(1);
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_dataset(rows, 9, rng);
  const SnnModel model = make_model(9, 4, rng);
  std::vector<double> out;
  for (auto _ : state) {
    batch_outputs(model, data, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rows));
}

void bm_gradient_serial(benchmark::State& state) {
  Rng rng(2);
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_dataset(rows, 9, rng);
  const SnnModel model = make_model(9, 4, rng);
  for (auto _ : state) {
    const ForwardBackward fb = forward_backward_serial(model, data);
    benchmark::DoNotOptimize(fb.gradient.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rows));
}

void bm_gradient_omp(benchmark::State& state) {
  Rng rng(2);
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_dataset(rows, 9, rng);
  const SnnModel model = make_model(9, 4, rng);
  for (auto _ : state) {
    const ForwardBackward fb = forward_backward(model, data);
    benchmark::DoNotOptimize(fb.gradient.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rows));
}

void bm_swarm_serial(benchmark::State& state) {
  Rng rng(3);
  const std::size_t n = 9, m = 4;
  const std::size_t d = dimension_count(n, m);
  const std::size_t pop = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_dataset(699, n, rng);
  std::vector<double> positions(pop * d);
  for (auto& p : positions) p = rng.uniform(-1, 1);
  std::vector<double> fitness;
  for (auto _ : state) {
    swarm_fitness_serial(positions, d, pop, n, m, data, Driver::Acc, 0.5, fitness);
    benchmark::DoNotOptimize(fitness.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pop));
}

void bm_swarm_omp(benchmark::State& state) {
  Rng rng(3);
  const std::size_t n = 9, m = 4;
  const std::size_t d = dimension_count(n, m);
  const std::size_t pop = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_dataset(699, n, rng);
  std::vector<double> positions(pop * d);
  for (auto& p : positions) p = rng.uniform(-1, 1);
  std::vector<double> fitness;
  for (auto _ : state) {
    swarm_fitness(positions, d, pop, n, m, data, Driver::Acc, 0.5, fitness);
    benchmark::DoNotOptimize(fitness.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pop));
}

}  // namespace

BENCHMARK(bm_outputs_serial)->Arg(699)->Arg(5574)->Arg(50000);
BENCHMARK(bm_outputs_omp)->Arg(699)->Arg(5574)->Arg(50000);
BENCHMARK(bm_gradient_serial)->Arg(699)->Arg(5574)->Arg(50000);
BENCHMARK(bm_gradient_omp)->Arg(699)->Arg(5574)->Arg(50000);
BENCHMARK(bm_swarm_serial)->Arg(82)->Arg(164);
BENCHMARK(bm_swarm_omp)->Arg(82)->Arg(164);

BENCHMARK_MAIN();
