#include <benchmark/benchmark.h>

#include <random>

#include "pheno/ocp_direct.hpp"
#include "pheno/pmp.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

static void BM_ExponentialStep(benchmark::State& state) {
  const auto p = paper_params();
  auto g = make_grid(static_cast<std::size_t>(state.range(0)));
  const SampledModel m(p, g);
  auto [h, c] = paper_initial(g);
  auto nH = h.values, nC = c.values;
  ExponentialStepper st(m);
  for (auto _ : state) {
    st.step(nH, nC, {0.0, 0.5}, 1e-3);
    benchmark::DoNotOptimize(nH.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExponentialStep)->Arg(101)->Arg(201)->Arg(801);

static void BM_Simulate10(benchmark::State& state) {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(201));
  SimOptions o;
  o.dt = 1e-3;
  o.n_snapshots = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(p, h, c, mtd_schedule(p, 10.0), 10.0, o).final_rho_C());
}
BENCHMARK(BM_Simulate10)->Unit(benchmark::kMillisecond);

static void BM_Gradient(benchmark::State& state) {
  const auto p = paper_params();
  const auto nt = static_cast<std::size_t>(state.range(0));
  const auto prob = transcribe(p, 30.0, nt, 101);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> u1(nt), u2(nt);
  for (std::size_t k = 0; k < nt; ++k) u1[k] = p.u1_max * U(rng), u2[k] = p.u2_max * U(rng);
  for (auto _ : state) benchmark::DoNotOptimize(objective_gradient(prob, u1, u2).value);
}
BENCHMARK(BM_Gradient)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);

static void BM_Synthesis(benchmark::State& state) {
  const auto p = paper_params();
  SynthesisOptions o;
  o.require_hypotheses = false;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_second_phase(p, {0.0, 0.5}, 3.0, o).final_rho_C);
}
BENCHMARK(BM_Synthesis)->Unit(benchmark::kMillisecond);

static void BM_Equilibrium(benchmark::State& state) {
  const auto p = paper_params();
  for (auto _ : state) benchmark::DoNotOptimize(equilibrium(p, {1.0, 1.0}).rho_C_inf);
}
BENCHMARK(BM_Equilibrium);
BENCHMARK_MAIN();
