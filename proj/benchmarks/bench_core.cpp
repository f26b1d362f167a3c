#include <benchmark/benchmark.h>

#include "conclab/distributions.hpp"
#include "conclab/functionals.hpp"
#include "conclab/harness.hpp"
#include "conclab/order_stats.hpp"
#include "conclab/rng.hpp"
#include "conclab/tail_opt.hpp"

using namespace conclab;

static void BM_BallSampler(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Eigen::VectorXd x(n);
  for (auto _ : state) {
    dist::draw_ball_q(rng, 1.5, x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_BallSampler)->Arg(16)->Arg(1024);

static void BM_OptimalMarkovNormal(benchmark::State& state) {
  const auto law = dist::normal();
  for (auto _ : state) benchmark::DoNotOptimize(tail::optimal_markov(law, 2.0).bound_value);
}
BENCHMARK(BM_OptimalMarkovNormal);

static void BM_LorentzDualSweep(benchmark::State& state) {
  Rng rng(2);
  Eigen::VectorXd y(state.range(0));
  for (auto& v : y) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(func::lorentz_dual_sweep(y, 2.0, 1.5));
}
BENCHMARK(BM_LorentzDualSweep)->Arg(64)->Arg(4096);

static void BM_OrderEnvelope(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(order::uniform_order_envelope(n, 2.0).upper.data());
}
BENCHMARK(BM_OrderEnvelope)->Arg(200)->Arg(2000);

static void BM_HaarRotation(benchmark::State& state) {
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(harness::haar_rotation(static_cast<int>(state.range(0)), rng).data());
}
BENCHMARK(BM_HaarRotation)->Arg(50)->Arg(500);

static void BM_VerifyLpnGauss(benchmark::State& state) {
  harness::ExperimentConfig c;
  c.sampler.n = 256;
  c.statistic.kind = "lp_sum";
  c.bound.theorem = "lpn_gauss";
  c.bound.params = {{"p", 1.0}};
  c.bound.grid = "theorem_t";
  c.t_grid = {1.0, 2.0, 3.0};
  c.trials = 2000;
  for (auto _ : state) benchmark::DoNotOptimize(harness::verify_bound(c).all_pass());
}
BENCHMARK(BM_VerifyLpnGauss)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
