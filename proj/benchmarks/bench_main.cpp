#include <benchmark/benchmark.h>

#include <random>

#include "corp/hybrid_sim.hpp"
#include "corp/linalg.hpp"
#include "corp/scenarios.hpp"

using namespace corp;

namespace {

Mat random_square(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(n, n);
    for (auto& v : m.data()) v = u(rng);
    return m;
}

void BM_MatExp(benchmark::State& state) {
    const Mat a = random_square(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(mat_exp(a, 0.1));
}
BENCHMARK(BM_MatExp)->Arg(3)->Arg(8)->Arg(26)->Arg(64);

void BM_Eigenvalues(benchmark::State& state) {
    const Mat a = random_square(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(a));
}
BENCHMARK(BM_Eigenvalues)->Arg(8)->Arg(24)->Arg(64);

void BM_Sylvester(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Mat a = random_square(n, 3) - 3.0 * Mat::identity(n);
    const Mat s{{0, -2}, {2, 0}};
    Mat p(n, 2, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_sylvester(a, s, p));
}
BENCHMARK(BM_Sylvester)->Arg(3)->Arg(10)->Arg(30);

void BM_SimulateExample(benchmark::State& state) {
    const auto s = example_4_1();
    const auto d = build_zoh_design(s.plants, s.exo, s.graph, s.h, {s.mu, s.k1});
    const auto init = random_initial_state(s, 1);
    SimulationOptions opt;
    opt.substeps = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(s.plants, s.exo, d, s.graph, init.x0, init.eta0, init.w0, 30.0, opt));
    }
}
BENCHMARK(BM_SimulateExample)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Microgrid(benchmark::State& state) {
    const MicrogridParams p;
    for (auto _ : state) benchmark::DoNotOptimize(run_microgrid(p, static_cast<double>(state.range(0)), 100));
}
BENCHMARK(BM_Microgrid)->Arg(5)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
