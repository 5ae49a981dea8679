#include <benchmark/benchmark.h>

#include <cmath>

#include "coneflow/geodesic.hpp"
#include "coneflow/integrals.hpp"
#include "coneflow/ode.hpp"

using namespace coneflow;

namespace {

PhasePoint round_launch() { return {Eigen::Vector3d(1, 0, 1), Eigen::Vector3d(0, 1, 0)}; }

PhasePoint torus_launch(const Manifold& m) {
  ConeChartState c{1.0, Eigen::Vector2d(0.4, 2.0), 0.3, Eigen::Vector2d(0.7, -0.4)};
  PhasePoint p = to_ambient(m, c);
  p.v.normalize();
  return p;
}

void BM_RoundFlow(benchmark::State& state) {
  const Manifold m(ManifoldConfig::circle(1.0));
  const auto backend = static_cast<Backend>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_trajectory(m, round_launch(), {-50, 50}, 1001, backend, {}));
  }
  state.SetLabel(backend == Backend::Direct ? "direct" : "lift");
}
BENCHMARK(BM_RoundFlow)->Arg(static_cast<int>(Backend::Direct))->Arg(static_cast<int>(Backend::Lift))
    ->Unit(benchmark::kMillisecond);

void BM_TorusFlow(benchmark::State& state) {
  const Manifold m(ManifoldConfig::torus(2.0, 0.5));
  const auto backend = static_cast<Backend>(state.range(0));
  const PhasePoint p = torus_launch(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_trajectory(m, p, {-20, 20}, 1001, backend, {}));
  }
  state.SetLabel(backend == Backend::Direct ? "direct" : "lift");
}
BENCHMARK(BM_TorusFlow)->Arg(static_cast<int>(Backend::Direct))->Arg(static_cast<int>(Backend::Lift))
    ->Unit(benchmark::kMillisecond);

void BM_Christoffels(benchmark::State& state) {
  const Manifold m(ManifoldConfig::torus(2.0, 0.5));
  const auto method = static_cast<DerivativeMethod>(state.range(0));
  const ChartCoords u = Eigen::Vector2d(0.4, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(m.christoffels(u, method));
  state.SetLabel(method == DerivativeMethod::Analytic ? "analytic" : "finite difference");
}
BENCHMARK(BM_Christoffels)
    ->Arg(static_cast<int>(DerivativeMethod::Analytic))
    ->Arg(static_cast<int>(DerivativeMethod::FiniteDifference));

void BM_IntegralVector(benchmark::State& state) {
  const Manifold m(ManifoldConfig::torus(2.0, 0.5));
  const PhasePoint p = torus_launch(m);
  for (auto _ : state) benchmark::DoNotOptimize(integrals_I_vec(m, p));
}
BENCHMARK(BM_IntegralVector)->Unit(benchmark::kMicrosecond);

void BM_OscillatorDopri(benchmark::State& state) {
  const OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy << y[1], -y[0];
  };
  OdeOptions opts;
  opts.rtol = std::pow(10.0, -static_cast<double>(state.range(0)));
  opts.atol = opts.rtol * 1e-2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(rhs, 0.0, Eigen::Vector2d(1, 0), 100.0, opts));
  }
}
BENCHMARK(BM_OscillatorDopri)->DenseRange(6, 12, 3)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
