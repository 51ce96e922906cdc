#include <benchmark/benchmark.h>

#include "rf/models.hpp"
#include "rf/study.hpp"

using namespace rf;

namespace {

NoiseSpec noise(NoiseKind kind, int dim, std::uint64_t stream, int substeps = 8) {
    NoiseSpec s;
    s.kind = kind;
    s.dim = dim;
    s.seed = 12;
    s.stream_id = stream;
    s.substeps = substeps;
    return s;
}

void BM_brownian_lift(benchmark::State& state) {
    const Grid grid(1.0, static_cast<int>(state.range(0)));
    std::uint64_t stream = 0;
    for (auto _ : state) {
        const MicroLift lift = make_lift(noise(NoiseKind::brownian_ito, 2, ++stream), grid);
        benchmark::DoNotOptimize(lift.rp.level1(1));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_brownian_lift)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

void BM_fbm_lift(benchmark::State& state) {
    const Grid grid(1.0, static_cast<int>(state.range(0)));
    NoiseSpec s = noise(NoiseKind::fbm, 1, 1);
    s.hurst = 0.4;
    for (auto _ : state) {
        ++s.stream_id;
        const MicroLift lift = make_lift(s, grid);
        benchmark::DoNotOptimize(lift.rp.level1(1));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_fbm_lift)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

void BM_chen_block(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GridRoughPath rp = make_lift(noise(NoiseKind::brownian_ito, 2, 3), Grid(1.0, n)).rp;
    for (auto _ : state) benchmark::DoNotOptimize(rp.chen_block(0, n));
    state.SetComplexityN(n);
}
BENCHMARK(BM_chen_block)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

void BM_hoelder_norm(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GridRoughPath rp = make_lift(noise(NoiseKind::brownian_ito, 2, 4), Grid(1.0, n)).rp;
    for (auto _ : state) benchmark::DoNotOptimize(homogeneous_norm(rp, 0.45));
    state.SetComplexityN(n);
}
BENCHMARK(BM_hoelder_norm)->Arg(256)->Arg(1024)->Arg(2048)->Complexity();

void BM_solve_slow_fast(benchmark::State& state) {
    const ModelBundle m = make_model("ou_sine");
    const int n = static_cast<int>(state.range(0));
    const Grid grid(1.0, n);
    const MixedLift xi = mixed_lift(
        make_lift(noise(NoiseKind::brownian_strat, 1, 5, 4), grid),
        make_lift(noise(NoiseKind::brownian_ito, 1, 6, 4), grid));
    for (auto _ : state) {
        const SlowFastSolution sol = solve_slow_fast(m.coeffs, xi, 0.2, m.x0, m.y0);
        benchmark::DoNotOptimize(sol.x_path.back());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_solve_slow_fast)->Arg(64)->Arg(256)->Arg(1024)->Complexity();

void BM_convergence_study_seed(benchmark::State& state) {
    StudySpec spec;
    spec.epsilons = {0.5, 0.1};
    spec.m_mc = 1;
    spec.macro_steps = static_cast<int>(state.range(0));
    spec.substeps = 2;
    for (auto _ : state) {
        ++spec.seed;
        const StudyResult res = convergence_study(spec);
        benchmark::DoNotOptimize(res.means[0]);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_convergence_study_seed)->Arg(64)->Arg(128)->Complexity();

}  // namespace

BENCHMARK_MAIN();
