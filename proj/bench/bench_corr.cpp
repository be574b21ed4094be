// corr_matrix (shared per-asset caches, OpenMP over pairs) vs the serial
// pair-by-pair reference.

#include <map>

#include <benchmark/benchmark.h>

#include "qmst/rhoq.hpp"
#include "qmst/synth.hpp"

namespace {

const qmst::ReturnPanel& panel(std::size_t assets) {
    static std::map<std::size_t, qmst::ReturnPanel> cache;
    auto it = cache.find(assets);
    if (it == cache.end()) it = cache.emplace(assets, qmst::gen_factor_panel(assets, 10080, 1.0, 1.0, 42)).first;
    return it->second;
}

void BM_CorrParallel(benchmark::State& state) {
    const auto& p = panel(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(qmst::corr_matrix(p, 4.0, 10, qmst::DetrendConfig{}));
}

void BM_CorrSerial(benchmark::State& state) {
    const auto& p = panel(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(qmst::corr_matrix_serial(p, 4.0, 10, qmst::DetrendConfig{}));
}

}  // namespace

BENCHMARK(BM_CorrParallel)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrSerial)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
