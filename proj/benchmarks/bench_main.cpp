#include <benchmark/benchmark.h>

#include "frfvib/frf.hpp"
#include "frfvib/gains.hpp"
#include "frfvib/integrator.hpp"
#include "frfvib/satellite_scenario.hpp"
#include "frfvib/tuner.hpp"

using namespace frfvib;

static void BM_Rk4StepDuffing(benchmark::State& state) {
  const auto sys = duffing_preset();
  const PdGains g = PdGains::diagonal(Vector::Constant(1, 7.0), Vector::Constant(1, 3.0));
  const auto field = closed_loop_field(sys, g, [](double t) { return 2.0 * std::sin(6.0 * t); });
  Rk4Stepper stepper(2);
  Vector x = Vector::Zero(2);
  double t = 0.0;
  for (auto _ : state) {
    stepper.step(field, t, 0.01, x);
    t += 0.01;
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Rk4StepDuffing);

static void BM_Rk4StepSatellite(benchmark::State& state) {
  SatelliteParams p;
  const auto field = satellite_torque_free_field(p);
  Rk4Stepper stepper(6);
  Vector x(6);
  x << 0.1, -0.2, 0.3, 0.1, -0.05, 0.2;
  double t = 0.0;
  for (auto _ : state) {
    stepper.step(field, t, 1e-3, x);
    t += 1e-3;
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Rk4StepSatellite);

static void BM_SteadyStateCell(benchmark::State& state) {
  const auto sys = duffing_preset();
  MdofFrfPlant plant(sys);
  const auto problem = plant.sweep_problem(PdGains::zero(1));
  IntegratorConfig cfg;
  for (auto _ : state) {
    const auto cell = problem.make_cell(3.0, 6.0);
    auto report = detect_steady_state(cell.field, cell.x0, 2 * M_PI / 6.0, cell.output, 2, cfg);
    benchmark::DoNotOptimize(report.peak_per_channel.data());
  }
}
BENCHMARK(BM_SteadyStateCell)->Unit(benchmark::kMillisecond);

static void BM_FrfSweepDuffing(benchmark::State& state) {
  MdofFrfPlant plant(duffing_preset());
  const auto grid = ExcitationGrid::from_ranges(0.5, 6.0, 0.5, 3.0, 9.0, 0.25);
  IntegratorConfig cfg;
  SweepOptions opts;
  opts.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = frf_sweep(plant.sweep_problem(PdGains::zero(1)), grid, cfg, opts);
    benchmark::DoNotOptimize(r.matrices.data());
  }
}
BENCHMARK(BM_FrfSweepDuffing)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
