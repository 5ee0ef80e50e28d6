// Micro-benchmarks for the hot paths: element state evaluation, tangent
// assembly, the prestress solve, the modal solve, and Newmark stepping on the
// full dome.
#include <benchmark/benchmark.h>

#include "cts/deploy.hpp"
#include "cts/dynamics.hpp"
#include "cts/levy.hpp"
#include "cts/modal.hpp"
#include "cts/statics.hpp"

namespace {

const cts::levy::DesignedDome& dome() {
  static const cts::levy::DesignedDome d = [] {
    cts::levy::DesignedDome design = cts::levy::design_dome({});
    design.structure.mat.mass_scale = 50.0;
    return design;
  }();
  return d;
}

void BM_EvaluateElements(benchmark::State& state) {
  const cts::Structure& s = dome().structure;
  for (auto _ : state) benchmark::DoNotOptimize(cts::evaluate_elements(s));
}
BENCHMARK(BM_EvaluateElements);

void BM_TangentStiffness(benchmark::State& state) {
  const cts::Structure& s = dome().structure;
  for (auto _ : state) benchmark::DoNotOptimize(cts::tangent_stiffness(s));
}
BENCHMARK(BM_TangentStiffness);

void BM_MassAssembly(benchmark::State& state) {
  const cts::Structure& s = dome().structure;
  for (auto _ : state) benchmark::DoNotOptimize(cts::assemble_mass(s));
}
BENCHMARK(BM_MassAssembly);

void BM_PrestressSolve(benchmark::State& state) {
  const cts::Structure& s = dome().structure;
  const cts::PrestressAnchor anchor = cts::levy::ib_anchor(dome().topo, -5000.0);
  for (auto _ : state) {
    const cts::EquilibriumMatrices eq = cts::equilibrium_matrices(s);
    const cts::SelfStressModes modes = cts::prestress_modes(eq.density_form);
    benchmark::DoNotOptimize(cts::solve_prestress(s, modes, anchor));
  }
}
BENCHMARK(BM_PrestressSolve);

void BM_ModalSolve(benchmark::State& state) {
  const cts::Structure& s = dome().structure;
  for (auto _ : state) benchmark::DoNotOptimize(cts::natural_frequencies(s, 10));
}
BENCHMARK(BM_ModalSolve);

void BM_NewmarkSteps(benchmark::State& state) {
  const cts::Structure& s = dome().structure;
  cts::DynamicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = state.range(0) * cfg.dt;
  cfg.damping_ratio = 0.01;
  cfg.newton_tol = 1e-4;
  cfg.mass_scale = 50.0;
  for (auto _ : state) benchmark::DoNotOptimize(cts::integrate(s, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NewmarkSteps)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
