#include <benchmark/benchmark.h>

#include <vector>

#include "delayflux/fd_solver.hpp"
#include "delayflux/greens.hpp"
#include "delayflux/spectral.hpp"

using namespace delayflux;

static void BM_ImplicitStep(benchmark::State& state) {
    const auto nx = static_cast<std::size_t>(state.range(0));
    std::vector<double> q(nx, 0.5);
    for (auto _ : state) {
        q = implicit_step(q, -0.4, 15.0 / static_cast<double>(nx), 1e-3);
        benchmark::DoNotOptimize(q.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(nx));
}
BENCHMARK(BM_ImplicitStep)->Arg(150)->Arg(600)->Arg(2400);

static void BM_SimulateDelayWindow(benchmark::State& state) {
    const ModelParams p{1.5, 4, 1.5};
    const auto data = InitialData::perturbed_steady(p, 0.5);
    const auto grid = Grid::defaults(p.tau, p.tau);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(p, data, grid).q0.back());
}
BENCHMARK(BM_SimulateDelayWindow)->Unit(benchmark::kMillisecond);

static void BM_HopfAnalysis(benchmark::State& state) {
    double Q = 1.2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(HopfAnalysis::of(Q).crossing_speed);
        Q = Q > 9.0 ? 1.2 : Q + 0.37;
    }
}
BENCHMARK(BM_HopfAnalysis);

static void BM_TrackRoot(benchmark::State& state) {
    std::vector<double> grid;
    for (int k = 1; k <= 1000; ++k) grid.push_back(2e-3 * k);
    for (auto _ : state) benchmark::DoNotOptimize(track_rightmost_root(1.5941, grid).back().lambda_re);
}
BENCHMARK(BM_TrackRoot)->Unit(benchmark::kMillisecond);

static void BM_BoundaryWeights(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        BoundaryWeights w(0.5, 0.05, n, DecayConvention::Shifted);
        benchmark::DoNotOptimize(w.weight(n, n / 2));
    }
}
BENCHMARK(BM_BoundaryWeights)->Arg(200)->Arg(800);

static void BM_MonotoneIterate(benchmark::State& state) {
    const ModelParams p{1.5, 4, 0};
    const auto data = InitialData::perturbed_steady(p, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(monotone_iterate(p, data, {5, 0.25, 1.5, 0.05}).last().sup_gap);
}
BENCHMARK(BM_MonotoneIterate)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
