#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "softid/dynamics.hpp"
#include "softid/harness.hpp"
#include "softid/oracle.hpp"

using namespace softid;

namespace {

struct State {
  VecX q, qd, qdd;
};

State random_state(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  State s{VecX(n), VecX(n), VecX(n)};
  for (int j = 0; j < n; ++j) {
    s.q(j) = std::numbers::pi * u(rng);
    s.qd(j) = 10.0 * u(rng);
    s.qdd(j) = 100.0 * u(rng);
  }
  return s;
}

void BM_iid(benchmark::State& st) {
  const ChainModel chain = planar_pcc_chain(static_cast<int>(st.range(0)));
  const State s = random_state(chain.dof(), 1);
  for (auto _ : st) benchmark::DoNotOptimize(iid(chain, s.q, s.qd, s.qdd));
  st.SetComplexityN(st.range(0));
}

void BM_miid(benchmark::State& st) {
  const ChainModel chain = planar_pcc_chain(static_cast<int>(st.range(0)));
  const State s = random_state(chain.dof(), 1);
  for (auto _ : st) benchmark::DoNotOptimize(miid(chain, s.q, s.qd, s.qdd).M);
  st.SetComplexityN(st.range(0));
}

void BM_oracle(benchmark::State& st) {
  const ChainModel chain = planar_pcc_chain(static_cast<int>(st.range(0)));
  const State s = random_state(chain.dof(), 1);
  for (auto _ : st) benchmark::DoNotOptimize(oracle_kane(chain, s.q, s.qd, s.qdd));
  st.SetComplexityN(st.range(0));
}

void BM_build(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(planar_pcc_chain(static_cast<int>(st.range(0))).dof());
}

}  // namespace

BENCHMARK(BM_iid)->RangeMultiplier(2)->Range(2, 32)->Complexity(benchmark::oN)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_miid)->RangeMultiplier(2)->Range(2, 32)->Complexity()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_oracle)->RangeMultiplier(2)->Range(2, 16)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build)->RangeMultiplier(2)->Range(2, 32)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
