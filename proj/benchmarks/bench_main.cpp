#include <benchmark/benchmark.h>

#include "hermlab/experiments.hpp"

namespace {

using namespace hermlab;

void BM_gauss_hermite_grid(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gauss_hermite_grid(m));
  }
}
BENCHMARK(BM_gauss_hermite_grid)->Arg(128)->Arg(512)->Arg(2048);

void BM_build_basis(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const QuadratureGrid grid = gauss_hermite_grid(4 * n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_basis(n, grid));
  }
}
BENCHMARK(BM_build_basis)->Arg(64)->Arg(256);

void BM_transform_round_trip(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BasisTable basis = build_basis(n, gauss_hermite_grid(4 * n));
  const HermiteState u = sample_gaussian_state(n, {1, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(to_coeffs(to_grid(u, basis), basis, n));
  }
}
BENCHMARK(BM_transform_round_trip)->Arg(64)->Arg(256);

void BM_step(benchmark::State& state) {
  GalerkinConfig cfg;
  cfg.p = 3.0;
  cfg.trunc_level = static_cast<int>(state.range(0));
  cfg.n_modes = 2 * cfg.trunc_level;
  const BasisTable basis = build_basis(cfg.n_modes, gauss_hermite_grid(4 * cfg.n_modes));
  const HermiteState u = sample_gaussian_state(cfg.n_modes, {1, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(u, 0.1, 1e-3, cfg, basis));
  }
}
BENCHMARK(BM_step)->Arg(16)->Arg(64);

void BM_sample_gaussian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_gaussian_state(n, {42, i++}));
  }
}
BENCHMARK(BM_sample_gaussian)->Arg(128)->Arg(1024);

void BM_besov_sup(benchmark::State& state) {
  const HermiteState u = sample_gaussian_state(1024, {7, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(besov_block_l2(u).maxCoeff());
  }
}
BENCHMARK(BM_besov_sup);

}  // namespace

BENCHMARK_MAIN();
