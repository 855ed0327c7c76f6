#include <benchmark/benchmark.h>

#include "qpspec/grid.hpp"
#include "qpspec/rng.hpp"
#include "qpspec/series.hpp"

using namespace qpspec;
using namespace qpspec::algebra;

namespace {

ScalarSeries random_series(int dim, int modes, int kmax, std::uint64_t seed) {
    Rng rng(seed);
    ScalarSeries f(WeightScheme::uniform(dim), 0.5);
    for (int m = 0; m < modes; ++m) {
        MultiIndex k(std::size_t(dim), 0);
        bool nz = false;
        for (auto& kj : k) {
            kj = int(rng.next_u64() % std::uint64_t(2 * kmax + 1)) - kmax;
            nz |= kj != 0;
        }
        if (!nz) k[0] = 1;
        f.add(k, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    }
    return f;
}

void BM_SeriesMultiply(benchmark::State& state) {
    const int modes = int(state.range(0));
    const auto f = random_series(1, modes, 24, 1);
    const auto g = random_series(1, modes, 24, 2);
    for (auto _ : state) {
        auto prod = series_multiply(f, g, 64.0);
        benchmark::DoNotOptimize(prod.series.size());
    }
}
BENCHMARK(BM_SeriesMultiply)->Arg(8)->Arg(32)->Arg(128);

void BM_GridRecovery(benchmark::State& state) {
    const auto f = random_series(1, 24, 32, 3);
    std::vector<MultiIndex> support;
    for (const auto& [k, v] : f.coefficients()) support.push_back(k);
    const TorusGrid grid = TorusGrid::for_support(support, 1);
    const detail::PhaseTable table(grid);
    const auto samples = series_grid_values(f, grid, table);
    for (auto _ : state) {
        auto rec = coefficients_from_grid<cplx>(samples, grid, support,
                                                f.scheme(), f.width());
        benchmark::DoNotOptimize(rec.residual);
    }
}
BENCHMARK(BM_GridRecovery);

void BM_MatExpLog(benchmark::State& state) {
    Rng rng(4);
    const cplx a(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    const Mat2 f{a, cplx(0.05, -0.02), cplx(-0.03, 0.01), -a};
    for (auto _ : state) {
        const Mat2 m = mat_exp_traceless(f);
        const Mat2 back = mat_log_near_identity(m);
        benchmark::DoNotOptimize(back.a);
    }
}
BENCHMARK(BM_MatExpLog);

}  // namespace
