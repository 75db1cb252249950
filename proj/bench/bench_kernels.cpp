#include "itrust/grid_kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using itrust::Matrix;
using itrust::Vector;
namespace k = itrust::kernels;

struct Problem {
  Matrix sym;
  Vector h;
};

Problem make_problem(Eigen::Index n) {
  std::mt19937_64 engine(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix b(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) b(i, j) = normal(engine);
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = normal(engine);
  return {b * b.transpose() / static_cast<double>(n), h};
}

// range(0) = dim, range(1) = points per axis
void BM_LatticeSerial(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  const k::Lattice lattice{state.range(0), state.range(1), 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(k::lattice_argmin_serial(p.sym, p.h, lattice));
  state.SetItemsProcessed(state.iterations() * lattice.size());
}

void BM_LatticeParallel(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  const k::Lattice lattice{state.range(0), state.range(1), 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(k::lattice_argmin_parallel(p.sym, p.h, lattice));
  state.SetItemsProcessed(state.iterations() * lattice.size());
}

void BM_CornerSerial(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(k::max_corner_gradient_norm_serial(p.sym, p.h, 0.5));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

void BM_CornerParallel(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(k::max_corner_gradient_norm_parallel(p.sym, p.h, 0.5));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

}  // namespace

BENCHMARK(BM_LatticeSerial)->Args({2, 1001})->Args({3, 101})->Args({3, 201})->Args({4, 41})
    ->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LatticeParallel)->Args({2, 1001})->Args({3, 101})->Args({3, 201})->Args({4, 41})
    ->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CornerSerial)->Arg(10)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CornerParallel)->Arg(10)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
