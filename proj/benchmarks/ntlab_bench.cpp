#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "ntlab/grid.hpp"
#include "ntlab/nodal.hpp"
#include "ntlab/random.hpp"
#include "ntlab/sign_field.hpp"
#include "ntlab/spectral.hpp"
#include "ntlab/transport.hpp"

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ntlab::GridFunction sine_grid(int n) {
  return ntlab::GridFunction::sample(2, n, false, [](const ntlab::Point& p) {
    return std::sin(kTwoPi * p[0]) * std::sin(kTwoPi * p[1]);
  });
}

void BM_W1ExactGrid(benchmark::State& state) {
  const ntlab::GridFunction f = sine_grid(static_cast<int>(state.range(0)));
  const auto mu = to_measure(f, ntlab::Sign::Plus), nu = to_measure(f, ntlab::Sign::Minus);
  for (auto _ : state) benchmark::DoNotOptimize(ntlab::w1_exact(mu, nu, ntlab::Metric::Euclidean).cost);
}
BENCHMARK(BM_W1ExactGrid)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_W1Random1D(benchmark::State& state) {
  ntlab::CounterRng rng(7);
  ntlab::DiscreteMeasure mu, nu;
  for (int i = 0; i < state.range(0); ++i) {
    mu.add({rng.uniform(), 0, 0}, 1.0);
    nu.add({rng.uniform(), 0, 0}, 1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ntlab::w1_exact(mu, nu, ntlab::Metric::Euclidean).cost);
}
BENCHMARK(BM_W1Random1D)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_NodalMeasure(benchmark::State& state) {
  const ntlab::GridFunction f = sine_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ntlab::nodal_measure(f).measure);
}
BENCHMARK(BM_NodalMeasure)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SignVolumes(benchmark::State& state) {
  const ntlab::GridFunction f = sine_grid(static_cast<int>(state.range(0)));
  const ntlab::CubeRegion cube{{0.37, 0.41, 0.0}, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(ntlab::sign_volumes(f, cube));
}
BENCHMARK(BM_SignVolumes)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_KernelOffsetTable(benchmark::State& state) {
  const ntlab::BochnerRieszKernel kernel(2, 4.0 * std::numbers::pi * std::numbers::pi * 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernel.offset_table(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_KernelOffsetTable)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
