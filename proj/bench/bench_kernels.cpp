#include <benchmark/benchmark.h>

#include <vector>

#include "rmtldp/dyson.hpp"
#include "rmtldp/montecarlo.hpp"
#include "rmtldp/numerics.hpp"
#include "rmtldp/rate.hpp"

namespace {

using namespace rmtldp;

CovarianceModel semicircle_model() { return CovarianceModel(SpectralMeasure::semicircle(2, 1), 1.0); }

CovarianceModel wishart_model() {
  const std::vector<double> loc{1.0}, w{1.0};
  return CovarianceModel(SpectralMeasure::from_atoms(loc, w), 1.0);
}

void BM_RateTable(benchmark::State& state) {
  const auto model = semicircle_model();
  for (auto _ : state) benchmark::DoNotOptimize(rate_table(model, 25.0, 400));
}

void BM_RateTableSerial(benchmark::State& state) {
  const auto model = semicircle_model();
  for (auto _ : state) benchmark::DoNotOptimize(rate_table_serial(model, 25.0, 400));
}

void BM_SigmaDensityGrid(benchmark::State& state) {
  const auto model = semicircle_model();
  const auto xs = numerics::linspace(0.1, 8.4, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(sigma_density_grid(model, xs, 1e-4));
}

void BM_SigmaDensityGridSerial(benchmark::State& state) {
  const auto model = semicircle_model();
  const auto xs = numerics::linspace(0.1, 8.4, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(sigma_density_grid_serial(model, xs, 1e-4));
}

void BM_EdgeStats(benchmark::State& state) {
  const auto model = wishart_model();
  for (auto _ : state) benchmark::DoNotOptimize(edge_stats(model, 200, 8, 7));
}

void BM_EdgeStatsSerial(benchmark::State& state) {
  const auto model = wishart_model();
  for (auto _ : state) benchmark::DoNotOptimize(edge_stats_serial(model, 200, 8, 7));
}

}  // namespace

BENCHMARK(BM_RateTable)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RateTableSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SigmaDensityGrid)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SigmaDensityGridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EdgeStats)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EdgeStatsSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
