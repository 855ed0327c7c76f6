#include <benchmark/benchmark.h>

#include "qpspec/kam.hpp"
#include "qpspec/rng.hpp"

using namespace qpspec;
using namespace qpspec::kam;
using algebra::ConeSpec;
using algebra::cplx;
using algebra::Mat2;
using algebra::MatSeries;
using algebra::MultiIndex;
using algebra::WeightScheme;

namespace {

MatSeries cone_series(const ConeSpec& cone, double h, int modes, double norm_target,
                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<MultiIndex> members;
    algebra::for_each_index(
        cone.scheme, 6.0, [&](const MultiIndex& k) { members.push_back(k); }, &cone);
    MatSeries f(cone.scheme, h);
    for (int m = 0; m < modes; ++m) {
        auto c = [&] { return cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)); };
        const cplx a = c();
        f.add(members[rng.next_u64() % members.size()], Mat2{a, c(), c(), -a});
    }
    return f.scaled(norm_target / f.norm());
}

void BM_HomologicalSolve(benchmark::State& state) {
    const auto g = dioph::Frequency::golden();
    ConeSpec cone{0.4, WeightScheme::uniform(1)};
    const auto f = cone_series(cone, 0.5, int(state.range(0)), 1e-3, 11);
    ConstantPart a;
    a.xi = 0.37;
    a.zeta = cplx(0.3, 0.1);
    for (auto _ : state) {
        auto y = homological_solve(a, f, g);
        benchmark::DoNotOptimize(y.size());
    }
}
BENCHMARK(BM_HomologicalSolve)->Arg(4)->Arg(16);

void BM_NonresonantStep(benchmark::State& state) {
    const auto g = dioph::Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    PerturbedCocycle p;
    p.a.xi = 0.37;
    p.a.zeta = cplx(0.3, 0.1);
    p.cone = cone;
    p.f = cone_series(cone, 0.6, 3, 1e-4, 12);
    StepParams sp;
    sp.h_next = 0.4;
    sp.r_next = 0.9;
    sp.solve_cutoff = 64.0;
    sp.k_cap = double(state.range(0));
    for (auto _ : state) {
        auto out = nonresonant_step(p, g, sp);
        benchmark::DoNotOptimize(out.grid_residual);
    }
}
BENCHMARK(BM_NonresonantStep)->Arg(32)->Arg(64);

}  // namespace
