#include <benchmark/benchmark.h>

#include <random>

#include "bifl/convexity.hpp"
#include "bifl/fields.hpp"
#include "bifl/lagrangian.hpp"
#include "bifl/solvers.hpp"
#include "bifl/spectral_poisson.hpp"

using namespace bifl;

namespace {

DepositedSources charge_and_loop(const GridSpec& g) {
  SourceSpec src;
  src.point_charges.push_back({1.0, {0.0, 0.0, 0.0}});
  src.current_loops.push_back({0.01, {0.0, 0.0, 0.0}, 0.3, 2});
  return deposit_sources(src, g);
}

void BM_EnergyDensity(benchmark::State& state) {
  const ModelParams m{1.0, state.range(0) == 0 ? Model::MBI : Model::MB, 1.0};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  FieldPoint p{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(p);
    benchmark::DoNotOptimize(energy_density(p, m));
    benchmark::DoNotOptimize(e_of_bd(p, m));
  }
}
BENCHMARK(BM_EnergyDensity)->Arg(0)->Arg(1);

void BM_EnergyHessianSignature(benchmark::State& state) {
  const ModelParams m{1.0, Model::MBI, 1.0};
  const FieldPoint p{{1, 2, 3}, {4, 5, 6}};
  for (auto _ : state) benchmark::DoNotOptimize(eigen_signature(energy_hessian(p, m)));
}
BENCHMARK(BM_EnergyHessianSignature);

void BM_SpectralNodeSolve(benchmark::State& state) {
  const GridSpec g{static_cast<int>(state.range(0)), 0.25};
  SpectralPoisson sp(g);
  Array3 rhs(placement_dims(Placement::Node, g.n), 1.0);
  Array3 u(rhs.dims());
  for (auto _ : state) {
    sp.solve_nodes(rhs, u);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rhs.size()));
}
BENCHMARK(BM_SpectralNodeSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SpectralEdgeSolve(benchmark::State& state) {
  const GridSpec g{static_cast<int>(state.range(0)), 0.25};
  SpectralPoisson sp(g);
  const EdgeField rhs = random_potentials(g, 2, 0.0, 0.5).A;
  EdgeField a = EdgeField::zeros(g);
  for (auto _ : state) {
    sp.solve_edges(rhs, a);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_SpectralEdgeSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LagrangianGradient(benchmark::State& state) {
  const GridSpec g{static_cast<int>(state.range(0)), 0.25};
  const DepositedSources dep = charge_and_loop(g);
  DiscreteLagrangian lag(dep, {1.0, Model::MBI, 1.0});
  const Potentials x = random_potentials(g, 3, 0.4, 0.4);
  Potentials grad = Potentials::zeros(g);
  for (auto _ : state) {
    lag.set_point(x);
    lag.gradient(grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_LagrangianGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HessianApply(benchmark::State& state) {
  const GridSpec g{static_cast<int>(state.range(0)), 0.25};
  const DepositedSources dep = charge_and_loop(g);
  DiscreteLagrangian lag(dep, {1.0, Model::MBI, 1.0});
  lag.set_point(random_potentials(g, 4, 0.4, 0.4));
  const Potentials v = random_potentials(g, 5, 0.3, 0.3);
  Potentials out = Potentials::zeros(g);
  for (auto _ : state) {
    lag.apply_hessian(v, out, {});
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_HessianApply)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SolveElectrostatic(benchmark::State& state) {
  const GridSpec g{static_cast<int>(state.range(0)), 0.25};
  SourceSpec src;
  src.point_charges.push_back({1.0, {0.0, 0.0, 0.0}});
  const ModelParams m{1.0, Model::MBI, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_electrostatic(src, g, m, SolveConfig{}).report.iterations);
}
BENCHMARK(BM_SolveElectrostatic)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
