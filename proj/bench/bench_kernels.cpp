// Serial reference vs OpenMP kernel, one benchmark pair per kernel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "solab/circle_dynamics.hpp"
#include "solab/currents.hpp"
#include "solab/immersion.hpp"
#include "solab/intersection.hpp"
#include "solab/schwartzman.hpp"

using namespace solab;

namespace {

const DenjoyRef& golden() {
  static DenjoyRef d = denjoy_build(RotationNumber::golden(), GapSchedule{});
  return d;
}

const ImmersedSolenoid& solenoid() {
  static ImmersedSolenoid s = realize({0.3, 0.7}, CycleLibrary::standard(2), golden());
  return s;
}

// fewer gaps keeps the quadrature of the full class integral near a second
const ImmersedSolenoid& coarse() {
  static ImmersedSolenoid s = [] {
    GapSchedule g;
    g.n_max = 1500;
    g.tolerance = 1e-3;
    return realize({0.3, 0.7}, CycleLibrary::standard(2), denjoy_build(RotationNumber::golden(), g));
  }();
  return s;
}

const ImmersedSolenoid& other() {
  static ImmersedSolenoid s = transverse_placement(realize({-1.2, 0.4}, CycleLibrary::standard(2), golden()), solenoid());
  return s;
}

template <bool Parallel>
void BM_birkhoff_sweep(benchmark::State& st) {
  BaseMap map(golden());
  CantorPartition p = partition_by_weights(*golden(), std::vector<double>{0.3, 0.7});
  auto obs = StepObservable::partition_indicator(p);
  auto starts = sample_cantor_points(*golden(), 16);
  for (auto _ : st) {
    auto r = Parallel ? birkhoff_sweep(map, obs, starts, 20000) : birkhoff_sweep_serial(map, obs, starts, 20000);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void BM_dual_form_raster(benchmark::State& st) {
  RasterOptions opt;
  for (auto _ : st) {
    auto g = Parallel ? dual_form_raster(solenoid(), opt) : dual_form_raster_serial(solenoid(), opt);
    benchmark::DoNotOptimize(g);
  }
}

template <bool Parallel>
void BM_fundamental_class_integral(benchmark::State& st) {
  TestForm f = TestForm::exact_form(2, TrigPolynomial::random(2, 6, 3, 11));
  for (auto _ : st) {
    double v = Parallel ? fundamental_class_integral(coarse(), f) : fundamental_class_integral_serial(coarse(), f);
    benchmark::DoNotOptimize(v);
  }
}

template <bool Parallel>
void BM_enumerate_crossings(benchmark::State& st) {
  for (auto _ : st) {
    auto c = Parallel ? enumerate_crossings(solenoid(), other()) : enumerate_crossings_serial(solenoid(), other());
    benchmark::DoNotOptimize(c);
  }
}

std::vector<Vec> random_path(std::mt19937_64& rng, int steps) {
  std::uniform_real_distribution<double> step(-0.6, 0.6);
  std::vector<Vec> p{{0.2, 0.3}};
  for (int k = 0; k < steps; ++k) p.push_back(p.back() + Vec{step(rng), step(rng)});
  return p;
}

template <bool Parallel>
void BM_count_path_crossings(benchmark::State& st) {
  std::mt19937_64 rng(5);
  auto a = random_path(rng, 4000), b = random_path(rng, 4000);
  for (auto _ : st) {
    auto c = Parallel ? count_path_crossings(a, b) : count_path_crossings_serial(a, b);
    benchmark::DoNotOptimize(c);
  }
}

template <bool Parallel>
void BM_estimator_sweep(benchmark::State& st) {
  auto hs = geometric_horizons(2000, 4);
  EstimatorConfig cfg = EstimatorConfig::standard(2, 5);
  std::vector<CurveSampler> curves;
  for (double x : sample_cantor_points(*golden(), 4, 0.41))
    curves.push_back(CurveSampler::path(trace_leaf(solenoid(), x, 0, 2000).path));
  for (auto _ : st) {
    auto r = Parallel ? estimator_sweep(curves, hs, cfg) : estimator_sweep_serial(curves, hs, cfg);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void BM_leaf_class_sweep(benchmark::State& st) {
  auto starts = sample_cantor_points(*golden(), 8, 0.77);
  for (auto _ : st) {
    auto r = Parallel ? leaf_class_sweep(solenoid(), starts, 10000) : leaf_class_sweep_serial(solenoid(), starts, 10000);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

#define SOLAB_PAIR(name)                                                        \
  BENCHMARK_TEMPLATE(name, false)->Name(#name "/serial")->Unit(benchmark::kMillisecond); \
  BENCHMARK_TEMPLATE(name, true)->Name(#name "/openmp")->Unit(benchmark::kMillisecond)

SOLAB_PAIR(BM_birkhoff_sweep);
SOLAB_PAIR(BM_dual_form_raster);
SOLAB_PAIR(BM_fundamental_class_integral);
SOLAB_PAIR(BM_enumerate_crossings);
SOLAB_PAIR(BM_count_path_crossings);
SOLAB_PAIR(BM_estimator_sweep);
SOLAB_PAIR(BM_leaf_class_sweep);

BENCHMARK_MAIN();
