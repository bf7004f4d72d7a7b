// Serial reference kernels against the production ones, on the default
// 880-cell mesh. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "nlcl/adjoint.hpp"
#include "nlcl/forward.hpp"
#include "nlcl/nonlocal.hpp"
#include "nlcl/reference.hpp"

using namespace nlcl;

namespace {

const Discretization& disc() {
  static const Discretization d = discretize(GridSpec{}, 0.01, Velocity::greenshields(), 1.0);
  return d;
}

std::vector<double> random_row(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void BM_nonlocal_direct(benchmark::State& state) {
  const auto q = random_row(disc().grid.cells(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(nonlocal_direct(q, disc().kernel));
}

void BM_nonlocal_fast(benchmark::State& state) {
  const auto q = random_row(disc().grid.cells(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(nonlocal_fast(q, disc().kernel));
}

void BM_step_reference(benchmark::State& state) {
  const auto q = random_row(disc().grid.cells(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::step(q, disc()));
}

void BM_step(benchmark::State& state) {
  const auto q = random_row(disc().grid.cells(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(step(q, disc()));
}

void BM_adjoint_step_reference(benchmark::State& state) {
  const auto q = random_row(disc().grid.cells(), 3);
  const auto p = random_row(disc().grid.cells(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(reference::adjoint_step(q, p, disc()));
}

void BM_adjoint_step(benchmark::State& state) {
  const auto q = random_row(disc().grid.cells(), 3);
  const auto p = random_row(disc().grid.cells(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(adjoint_step(q, p, disc()));
}

void BM_full_gradient(benchmark::State& state) {
  Control c = sample_control(disc().grid, [](double x) { return 0.5 * indicator(x); }, 1.0);
  const ObjectiveSpec spec{ObjectiveKind::state_tracking, make_target(TargetKind::ramp, disc())};
  for (auto _ : state) benchmark::DoNotOptimize(gradient(c, spec, disc()));
}

}  // namespace

BENCHMARK(BM_nonlocal_direct);
BENCHMARK(BM_nonlocal_fast);
BENCHMARK(BM_step_reference);
BENCHMARK(BM_step);
BENCHMARK(BM_adjoint_step_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_adjoint_step);
BENCHMARK(BM_full_gradient)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
