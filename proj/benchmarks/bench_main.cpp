// Microbenchmarks for the hot paths: output-matrix assembly, the rank test,
// gramian evaluation and observer time stepping.

#include <cmath>

#include <benchmark/benchmark.h>

#include "gradobs/observer.hpp"
#include "gradobs/scenario.hpp"
#include "gradobs/sensors.hpp"
#include "gradobs/strategic.hpp"

using namespace gradobs;

namespace {

DiffusionModel interval_16() {
  DiffusionModel m;
  m.geometry = DomainGeometry::interval(1.0);
  m.gamma1 = 0.01;
  m.gamma2 = 1.0;
  m.n1 = 16;
  return m;
}

DiffusionModel square_256() {
  DiffusionModel m;
  m.geometry = DomainGeometry::rectangle(1.0, 1.0);
  m.gamma1 = 0.01;
  m.gamma2 = 0.6;
  m.n1 = 16;
  m.n2 = 16;
  return m;
}

void BM_OutputMatrixPointwise(benchmark::State& state) {
  const auto m = square_256();
  const std::vector<Sensor> sensors = {
      PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}},
      PointwiseSensor{Point{1.0 / M_PI, 1.0 / std::exp(1.0)}}};
  for (auto _ : state) benchmark::DoNotOptimize(build_output_matrix(sensors, m));
}
BENCHMARK(BM_OutputMatrixPointwise);

void BM_OutputMatrixZoneQuadrature(benchmark::State& state) {
  const auto m = square_256();
  const std::vector<Sensor> sensors = {
      ZoneSensor{Subregion::rectangle(0.2, 0.5, 0.3, 0.8), SensorWeight::symmetric()}};
  for (auto _ : state)
    benchmark::DoNotOptimize(build_output_matrix(sensors, m, 32));
}
BENCHMARK(BM_OutputMatrixZoneQuadrature);

void BM_StrategicCheck(benchmark::State& state) {
  const auto m = square_256();
  const auto output = build_output_matrix(
      {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}},
       PointwiseSensor{Point{1.0 / M_PI, 1.0 / std::exp(1.0)}}},
      m);
  const Subregion omega = Subregion::rectangle(0.25, 0.75, 0.25, 0.75);
  for (auto _ : state) benchmark::DoNotOptimize(check_strategic(output, omega));
}
BENCHMARK(BM_StrategicCheck);

void BM_GramianOracle(benchmark::State& state) {
  const auto m = interval_16();
  const auto output =
      build_output_matrix({PointwiseSensor{Point{1.0 / std::sqrt(2.0), 0.0}}}, m);
  GramianOptions opt;
  opt.mode_subset = {0, 1, 2};
  const Subregion omega = Subregion::interval(0.2, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(gramian_oracle(output, omega, opt));
}
BENCHMARK(BM_GramianOracle);

void BM_SimulateInterval(benchmark::State& state) {
  auto config = canned_scenario("example_4_5");
  config.observer.horizon = state.range(0) * 1e-3;  // steps at dt = 1e-3
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateInterval)->Arg(100)->Arg(1000);

void BM_GainPlacement(benchmark::State& state) {
  const auto m = interval_16();
  const auto output =
      build_output_matrix({PointwiseSensor{Point{1.0 / std::sqrt(2.0), 0.0}}}, m);
  GainOptions opt;
  opt.target_mu = -2.0;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_gain(output, opt));
}
BENCHMARK(BM_GainPlacement);

}  // namespace

BENCHMARK_MAIN();
