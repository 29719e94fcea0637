// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <robforge/evaluation.hpp>

namespace {

std::vector<robforge::LabeledPair> random_pairs(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<robforge::LabeledPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        robforge::LabeledPair p;
        p.gold = static_cast<robforge::RiskLabel>(rng() % 3);
        p.predicted = static_cast<robforge::RiskLabel>(rng() % 3);
        pairs.push_back(p);
    }
    return pairs;
}

void BM_Kappa(benchmark::State& state) {
    auto pairs = random_pairs(static_cast<int>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(robforge::cohen_kappa(pairs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BootstrapCI(benchmark::State& state) {
    auto pairs = random_pairs(100, 11);
    robforge::Statistic accuracy =
        [](const std::vector<robforge::LabeledPair>& sample) -> std::optional<double> {
        return robforge::correct_rate(sample);
    };
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            robforge::bootstrap_ci(accuracy, pairs, state.range(0), 42).ci_low);
    }
}

}  // namespace

BENCHMARK(BM_Kappa)->Arg(100)->Arg(10000);
BENCHMARK(BM_BootstrapCI)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
