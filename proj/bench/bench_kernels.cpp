#include <benchmark/benchmark.h>

#include <random>

#include "nphf/domain_gen.hpp"
#include "nphf/kernels.hpp"
#include "nphf/model.hpp"
#include "nphf/search.hpp"

using namespace nphf;
using kernels::Matrix;

namespace {

Matrix<float> random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double density = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> val(-1.0f, 1.0f);
  std::bernoulli_distribution keep(density);
  Matrix<float> m(r, c);
  for (float& x : m.flat()) x = keep(rng) ? val(rng) : 0.0f;
  return m;
}

// Args: rows, inner, cols, input density in percent.
template <bool Parallel>
void BM_matmul(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0)), k = static_cast<std::size_t>(state.range(1)),
             n = static_cast<std::size_t>(state.range(2));
  const Matrix<float> a = random_matrix(m, k, 1, static_cast<double>(state.range(3)) / 100.0);
  const Matrix<float> b = random_matrix(k, n, 2);
  Matrix<float> c(m, n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::matmul<float>(a.cref(), b.cref(), c.ref());
    else
      kernels::reference::matmul<float>(a.cref(), b.cref(), c.ref());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * k * n));
}

void matmul_shapes(benchmark::internal::Benchmark* b) {
  // Input layer on one-hot encodings, hidden layer, residual block, output layer.
  b->Args({1000, 153, 400, 6});
  b->Args({1000, 400, 128, 100});
  b->Args({1000, 128, 128, 100});
  b->Args({1000, 128, 1, 100});
  b->Args({3000, 153, 400, 6});
}

template <bool Parallel>
void BM_adam(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<float> p(n, 0.5f), g(n, 0.1f), m(n), v(n);
  const kernels::AdamHyper h{1e-3, 0.9, 0.999, 1e-8};
  long step = 0;
  for (auto _ : state) {
    ++step;
    if constexpr (Parallel)
      kernels::adam_update<float>(p, g, m, v, h, step);
    else
      kernels::reference::adam_update<float>(p, g, m, v, h, step);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_forward_desk(benchmark::State& state) {
  const auto model = HeuristicModel::init(ModelConfig::desk(153), 1, {3, true});
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 153, 3, 0.06);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x.cref()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_train_step_desk(benchmark::State& state) {
  auto model = HeuristicModel::init(ModelConfig::desk(153), 1, {3, true});
  AdamState<float> adam(model.parameter_count());
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(rows, 153, 4, 0.06);
  const std::vector<float> t(rows, 10.0f);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(model, adam, x.cref(), std::span<const float>(t)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_search_oracle(benchmark::State& state) {
  const PuzzleDomain c = make_fixed(3, DomainKind::canonical);
  const OracleTable table = backward_bfs(c);
  const OracleHeuristic h(table);
  const PuzzleState start = random_walk(c, 5000, 7);
  const SearchConfig cfg{0.8, static_cast<std::size_t>(state.range(0)), 200, 20'000'000};
  std::size_t nodes = 0;
  for (auto _ : state) nodes += solve(c, start, h, cfg).nodes_generated;
  state.SetItemsProcessed(static_cast<std::int64_t>(nodes));
}

}  // namespace

BENCHMARK(BM_matmul<true>)->Name("matmul/openmp")->Apply(matmul_shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_matmul<false>)->Name("matmul/reference")->Apply(matmul_shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_adam<true>)->Name("adam/openmp")->Arg(186'000);
BENCHMARK(BM_adam<false>)->Name("adam/reference")->Arg(186'000);
BENCHMARK(BM_forward_desk)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_train_step_desk)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_search_oracle)->Arg(1)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
