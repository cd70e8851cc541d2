#include <benchmark/benchmark.h>

#include <map>

#include "hawkes/kernels.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;

namespace {

struct Fixture {
    Dataset data;
    BasisConfig basis;
    ModelParams params;
    EventFeatures features;
};

const Fixture& fixture(std::size_t num_sequences) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(num_sequences);
    if (it == cache.end()) {
        auto syn = make_synthetic(SyntheticConfig{5, num_sequences, 50.0, KernelFamily::sine_like,
                                                  SupportWindow::continuous, 7});
        auto basis = BasisConfig::uniform(20, 1.2, 50.0);
        ModelParams params(5, 20);
        for (int u = 0; u < 5; ++u) params.mu(u) = 0.1;
        for (auto& a : params.coefficients()) a = 0.01;
        auto features = serial::build_features(syn.data, basis);
        it = cache.emplace(num_sequences, Fixture{std::move(syn.data), basis, params, std::move(features)}).first;
    }
    return it->second;
}

void BM_build_features_serial(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::build_features(f.data, f.basis));
    state.counters["events"] = static_cast<double>(f.data.total_events());
}

void BM_build_features_omp(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_features(f.data, f.basis));
    state.counters["threads"] = thread_count();
}

void BM_em_moments_serial(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::em_moments(f.features, f.params));
}

void BM_em_moments_omp(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(em_moments(f.features, f.params));
    state.counters["threads"] = thread_count();
}

void BM_em_moments_direct(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::em_moments_direct(f.data, f.basis, f.params));
}

}  // namespace

BENCHMARK(BM_build_features_serial)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_features_omp)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_em_moments_serial)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_em_moments_omp)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_em_moments_direct)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
