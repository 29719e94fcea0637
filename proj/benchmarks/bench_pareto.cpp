// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <robforge/optimizer.hpp>

namespace {

std::vector<robforge::PromptCandidate> random_pool(int n, std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> level(0, 4);
    std::vector<robforge::PromptCandidate> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        robforge::PromptCandidate c;
        c.candidate_id = "c" + std::to_string(i);
        std::vector<double> scores(len);
        for (auto& s : scores) s = level(rng) / 4.0;
        c.scores = std::move(scores);
        pool.push_back(std::move(c));
    }
    return pool;
}

void BM_ParetoUpdate(benchmark::State& state) {
    auto pool = random_pool(static_cast<int>(state.range(0)), 12, 7);
    for (auto _ : state) {
        robforge::ParetoFront front;
        for (const auto& c : pool) benchmark::DoNotOptimize(front.update(c));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SelectParent(benchmark::State& state) {
    robforge::ParetoFront front;
    for (const auto& c : random_pool(static_cast<int>(state.range(0)), 12, 7)) front.update(c);
    std::mt19937_64 rng(42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(robforge::select_parent(front, rng).candidate_id.size());
    }
}

}  // namespace

BENCHMARK(BM_ParetoUpdate)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(BM_SelectParent)->Arg(64)->Arg(256);
