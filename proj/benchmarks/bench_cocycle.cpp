#include <benchmark/benchmark.h>

#include "qpspec/cocycle.hpp"

using namespace qpspec;
using algebra::cplx;
using algebra::ScalarSeries;
using algebra::WeightScheme;

namespace {

cocycle::CocycleSpec make_spec(int modes) {
    cocycle::CocycleSpec spec;
    spec.alpha = dioph::Frequency::golden();
    spec.energy = cplx(0.3, 0.1);
    spec.pot.lambda = 2.0;
    spec.pot.v = ScalarSeries(WeightScheme::uniform(1), 2.0);
    for (int k = 1; k <= modes; ++k) spec.pot.v.set({k}, 1.0 / double(k));
    return spec;
}

void BM_TransferOrbit(benchmark::State& state) {
    const auto spec = make_spec(int(state.range(0)));
    const std::int64_t n = 10000;
    for (auto _ : state) {
        const auto est = cocycle::lyapunov(spec, n, 1, 7);
        benchmark::DoNotOptimize(est.value);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TransferOrbit)->Arg(1)->Arg(4)->Arg(16);

void BM_UhDetect(benchmark::State& state) {
    auto spec = make_spec(1);
    spec.energy = cplx(2.5, 0.0);
    cocycle::UhOptions opt;
    opt.iterates = 20000;
    opt.phases = 4;
    for (auto _ : state) {
        const auto rep = cocycle::uh_detect(spec, opt);
        benchmark::DoNotOptimize(rep.verdict);
    }
}
BENCHMARK(BM_UhDetect);

}  // namespace

BENCHMARK_MAIN();
