#include <benchmark/benchmark.h>

#include <string>

#include "gridclear/market_clearing.h"
#include "gridclear/market_data.h"
#include "gridclear/powerflow.h"
#include "gridclear/sensitivities.h"
#include "gridclear/sparse.h"

namespace gridclear {
namespace {

const NetworkCase& Case(const std::string& name) {
  static const NetworkCase ieee14 =
      LoadCaseFile(std::string(GRIDCLEAR_BENCH_DATA_DIR) + "/ieee14.json");
  static const NetworkCase ieee118 =
      LoadCaseFile(std::string(GRIDCLEAR_BENCH_DATA_DIR) + "/ieee118.json");
  static const NetworkCase market =
      LoadCaseFile(std::string(GRIDCLEAR_BENCH_DATA_DIR) + "/ieee14_market.json");
  if (name == "14") return ieee14;
  if (name == "118") return ieee118;
  return market;
}

const char* Name(int64_t buses) { return buses == 14 ? "14" : "118"; }

void BM_FastDecoupled(benchmark::State& state) {
  const NetworkCase& c = Case(Name(state.range(0)));
  for (auto _ : state) {
    PowerFlowSolution s = SolveFastDecoupled(c);
    benchmark::DoNotOptimize(s.max_mismatch);
  }
}
BENCHMARK(BM_FastDecoupled)->Arg(14)->Arg(118)->Unit(benchmark::kMicrosecond);

// Solve only, factors reused across calls.
void BM_FastDecoupledCached(benchmark::State& state) {
  const NetworkCase& c = Case(Name(state.range(0)));
  const FastDecoupledSolver solver(c);
  const BusInjections inj = StaticInjections(c);
  for (auto _ : state) {
    PowerFlowSolution s = solver.Solve(inj);
    benchmark::DoNotOptimize(s.max_mismatch);
  }
}
BENCHMARK(BM_FastDecoupledCached)->Arg(14)->Arg(118)->Unit(benchmark::kMicrosecond);

void BM_NumericFactorize(benchmark::State& state) {
  const FastDecoupledSolver solver(Case(Name(state.range(0))));
  const sparse::SparseMatrix& a = solver.matrices().b_prime;
  const sparse::SymbolicFactor pattern = sparse::SymbolicFactorize(a);
  for (auto _ : state) {
    sparse::LUFactors f = sparse::NumericFactorize(a, pattern);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_NumericFactorize)->Arg(14)->Arg(118)->Unit(benchmark::kMicrosecond);

void BM_ShiftFactors(benchmark::State& state) {
  const NetworkCase& c = Case(Name(state.range(0)));
  for (auto _ : state) {
    ShiftFactorTable t = GenerationShiftFactors(c, c.slack_index());
    benchmark::DoNotOptimize(t.gsf);
  }
}
BENCHMARK(BM_ShiftFactors)->Arg(14)->Arg(118)->Unit(benchmark::kMicrosecond);

void BM_DeliveryFactors(benchmark::State& state) {
  const NetworkCase& c = Case(Name(state.range(0)));
  const FastDecoupledSolver solver(c);
  const BusInjections inj = StaticInjections(c);
  const PowerFlowSolution base = solver.Solve(inj);
  for (auto _ : state) {
    DeliveryFactorTable t = DeliveryFactors(solver, inj, base, c.slack_index());
    benchmark::DoNotOptimize(t.df);
  }
}
BENCHMARK(BM_DeliveryFactors)->Arg(14)->Arg(118)->Unit(benchmark::kMillisecond);

void BM_ClearFixture(benchmark::State& state) {
  const NetworkCase& c = Case("market");
  for (auto _ : state) {
    ClearingResult r = ClearMarket(c);
    benchmark::DoNotOptimize(r.lmp_ave);
  }
}
BENCHMARK(BM_ClearFixture)->Unit(benchmark::kMillisecond);

void BM_Clear118(benchmark::State& state) {
  const NetworkCase& c = Case("118");
  for (auto _ : state) {
    ClearingResult r = ClearMarket(c);
    benchmark::DoNotOptimize(r.lmp_ave);
  }
}
BENCHMARK(BM_Clear118)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
}  // namespace gridclear

BENCHMARK_MAIN();
