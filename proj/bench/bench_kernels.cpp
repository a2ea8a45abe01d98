#include "lifespan/kernels.hpp"
#include "lifespan/model.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace lifespan;

namespace {

struct LevelSetup {
  LevelFields now, next;
  std::vector<double> weight;
  NodeRange range;
  StepConfig cfg;

  explicit LevelSetup(std::size_t n) : now(n), next(n), weight(n) {
    const double delta = 20.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = -10.0 + delta * static_cast<double>(i);
      now.w[i] = 0.1 * std::exp(-x * x);
      now.v[i] = 0.05 * std::exp(-x * x);
      weight[i] = lifespan::weight(x, 0.5);
    }
    range = {1, static_cast<std::ptrdiff_t>(n) - 2};
    cfg = {delta, 2.0, true};
  }
};

void BM_advance_serial(benchmark::State& state) {
  LevelSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(advance_level_serial(s.now, s.next, s.weight, s.range, s.cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_advance_parallel(benchmark::State& state) {
  LevelSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(advance_level_parallel(s.now, s.next, s.weight, s.range, s.cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

SpaceTimeField line_field(std::size_t levels) {
  const double delta = 1.0 / static_cast<double>(levels);
  const std::size_t nodes = 2 * levels + 41;
  SpaceTimeField f(levels, nodes, -delta * static_cast<double>(nodes / 2), delta);
  for (std::size_t n = 0; n < levels; ++n)
    for (std::size_t i = 0; i < nodes; ++i) f.at(n, i) = std::cos(f.x(i)) * (1.0 + f.t(n));
  return f;
}

template <bool Parallel>
void BM_line_operator(benchmark::State& state) {
  const SpaceTimeField f = line_field(static_cast<std::size_t>(state.range(0)));
  std::vector<double> w(f.nodes);
  for (std::size_t i = 0; i < f.nodes; ++i) w[i] = weight(f.x(i), 0.5);
  SpaceTimeField out(f.levels, f.nodes, f.x0, f.delta);
  for (auto _ : state) {
    if constexpr (Parallel)
      line_operator_parallel(f, w, LineSign::plus, out);
    else
      line_operator_serial(f, w, LineSign::plus, out);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.levels * f.nodes));
}

}  // namespace

BENCHMARK(BM_advance_serial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_advance_parallel)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_line_operator<false>)->Arg(100)->Arg(400);
BENCHMARK(BM_line_operator<true>)->Arg(100)->Arg(400);

BENCHMARK_MAIN();
