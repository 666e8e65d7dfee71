#include <benchmark/benchmark.h>

#include <random>

#include "rwre/kernels.hpp"
#include "rwre/sim.hpp"

using namespace rwre;

namespace {

std::shared_ptr<const PeriodicEnvironment> bench_env() {
  std::vector<std::vector<double>> cells(12, {0.3, 0.2, 0.25, 0.25});
  return std::make_shared<const PeriodicEnvironment>(
      std::vector<std::int64_t>{4, 3}, StepRange(2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}),
      std::move(cells));
}

struct Fixture {
  WordSpace space;
  std::vector<double> w, x, y;
  explicit Fixture(int ell) : space(bench_env(), ell) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const std::size_t S = space.num_states(), K = space.num_letters();
    w.resize(S * K);
    x.resize(S);
    y.resize(S);
    for (double& v : w) v = unif(rng);
    for (double& v : x) v = unif(rng);
  }
};

template <bool Parallel>
void BM_ShiftMatvec(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  const std::size_t K = fx.space.num_letters();
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::shift_matvec_parallel(fx.space.successors(), fx.w, K, fx.x, fx.y);
    else
      kernels::shift_matvec_serial(fx.space.successors(), fx.w, K, fx.x, fx.y);
    benchmark::DoNotOptimize(fx.y.data());
  }
  state.counters["states"] = static_cast<double>(fx.space.num_states());
}

template <bool Parallel>
void BM_MaxPlus(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  const std::size_t K = fx.space.num_letters();
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::maxplus_step_parallel(fx.space.successors(), fx.w, K, fx.x, fx.y, true);
    else
      kernels::maxplus_step_serial(fx.space.successors(), fx.w, K, fx.x, fx.y, true);
    benchmark::DoNotOptimize(fx.y.data());
  }
  state.counters["states"] = static_cast<double>(fx.space.num_states());
}

template <bool Parallel>
void BM_McCgf(benchmark::State& state) {
  const auto env = bench_env();
  const WordSpace sp(env, 1);
  StateFunction f{std::vector<double>(sp.num_states())};
  for (std::size_t s = 0; s < f.values.size(); ++s) f.values[s] = 0.1 * static_cast<double>(s % 5);
  SimConfig cfg;
  cfg.n = 256;
  cfg.samples = static_cast<std::size_t>(state.range(0));
  cfg.seed = 9;
  cfg.parallel = Parallel;
  for (auto _ : state) benchmark::DoNotOptimize(mc_cgf(*env, f, 1, cfg).value);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.samples * cfg.n));
}

}  // namespace

BENCHMARK(BM_ShiftMatvec<false>)->Arg(3)->Arg(5);
BENCHMARK(BM_ShiftMatvec<true>)->Arg(3)->Arg(5);
BENCHMARK(BM_MaxPlus<false>)->Arg(3)->Arg(5);
BENCHMARK(BM_MaxPlus<true>)->Arg(3)->Arg(5);
BENCHMARK(BM_McCgf<false>)->Arg(20000);
BENCHMARK(BM_McCgf<true>)->Arg(20000);

BENCHMARK_MAIN();
