#include <benchmark/benchmark.h>

#include <cmath>

#include "l0relax/bench.hpp"
#include "l0relax/exact.hpp"
#include "l0relax/perspective.hpp"
#include "l0relax/rounding.hpp"
#include "l0relax/sdp.hpp"

using namespace l0relax;

namespace {

ProblemInstance make(int p, double lambda = 0.1, double mu = 0.1) {
  SimSpec spec{100, p, std::min(10, p / 2), std::sqrt(5.0), 1, 1};
  if (p > 60) spec.n = 2 * p;
  return generate_instance(spec, lambda, mu, 0);
}

}  // namespace

// Arg is p. There are 2p + 1 constraints, so the dense Schur system is (2p + 1)^2.
static void BM_SolveSdp(benchmark::State& state) {
  const SdpProblem prob = build_sdp(make(static_cast<int>(state.range(0))));
  int iters = 0;
  for (auto _ : state) {
    const SdpSolution s = solve_sdp(prob);
    iters = s.stats.iterations;
    benchmark::DoNotOptimize(s.dual.value);
  }
  state.counters["ipm_iterations"] = iters;
}
BENCHMARK(BM_SolveSdp)->Arg(12)->Arg(30)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_SolvePwg(benchmark::State& state) {
  const ProblemInstance inst = make(static_cast<int>(state.range(0)));
  const PerspectiveParams d = delta_pwg(inst);
  for (auto _ : state) benchmark::DoNotOptimize(solve_pr(inst, d).value);
}
BENCHMARK(BM_SolvePwg)->Arg(12)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_BruteForce(benchmark::State& state) {
  const ProblemInstance inst = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force(inst).objective);
}
BENCHMARK(BM_BruteForce)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_BranchAndBound(benchmark::State& state) {
  const ProblemInstance inst = make(static_cast<int>(state.range(0)), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_big_m(inst, BnbConfig{}).nodes);
}
BENCHMARK(BM_BranchAndBound)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_GwRounding(benchmark::State& state) {
  const ProblemInstance inst = make(20);
  const SdpSolution s = solve_sdp(build_sdp(inst));
  const CorrelationLift lift = build_lift(s.primal);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gw_round(inst, lift, static_cast<int>(state.range(0)), 7).objective);
  }
}
BENCHMARK(BM_GwRounding)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
