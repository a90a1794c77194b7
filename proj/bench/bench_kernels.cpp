// Copyright 2026 The NNN Retrieval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against the parallel packed kernels, and exact
// against inverted-file bias estimation. Set NNN_THREADS or OMP_NUM_THREADS
// to control the thread count.

#include <benchmark/benchmark.h>

#include "nnn/kernels.hpp"
#include "nnn/normalization.hpp"
#include "nnn/synthetic.hpp"
#include "nnn/vector_index.hpp"

namespace {

const nnn::RetrievalProblem& problem() {
    static const nnn::RetrievalProblem p = [] {
        nnn::ClusteredConfig cfg;
        cfg.n_candidates = 4000;
        cfg.n_reference = 8000;
        cfg.n_test = 256;
        cfg.n_topics = 64;
        return nnn::make_clustered(cfg);
    }();
    return p;
}

void BM_TopkReference(benchmark::State& state) {
    const auto& p = problem();
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnn::kernels::reference::topk_search(p.test_queries, p.candidates, 10));
    }
    state.SetItemsProcessed(state.iterations() * p.test_queries.rows() * p.candidates.rows());
}
BENCHMARK(BM_TopkReference)->Unit(benchmark::kMillisecond);

void BM_TopkPacked(benchmark::State& state) {
    const auto& p = problem();
    const nnn::kernels::PackedRows rows(p.candidates);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnn::kernels::topk_search(p.test_queries, rows, 10));
    }
    state.SetItemsProcessed(state.iterations() * p.test_queries.rows() * p.candidates.rows());
}
BENCHMARK(BM_TopkPacked)->Unit(benchmark::kMillisecond);

void BM_LogsumexpReference(benchmark::State& state) {
    const auto& p = problem();
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnn::kernels::reference::logsumexp_rows(p.candidates, p.test_queries, 20.0));
    }
}
BENCHMARK(BM_LogsumexpReference)->Unit(benchmark::kMillisecond);

void BM_LogsumexpParallel(benchmark::State& state) {
    const auto& p = problem();
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnn::kernels::logsumexp_rows(p.candidates, p.test_queries, 20.0));
    }
}
BENCHMARK(BM_LogsumexpParallel)->Unit(benchmark::kMillisecond);

void BM_BiasExact(benchmark::State& state) {
    const auto& p = problem();
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnn::compute_bias_exact(p.candidates, p.ref_queries, 0.75, 16));
    }
}
BENCHMARK(BM_BiasExact)->Unit(benchmark::kMillisecond);

// Search only; the index is built once outside the loop.
void BM_BiasIvf(benchmark::State& state) {
    const auto& p = problem();
    const auto nprobe = static_cast<std::size_t>(state.range(0));
    const auto index = nnn::VectorIndex::build_ivf(p.ref_queries, nnn::default_ncentroids(p.ref_queries.rows()),
                                                   nnn::kDefaultKmeansIters, nnn::kDefaultSeed);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnn::compute_bias(p.candidates, p.ref_queries, 0.75, 16, index, nprobe));
    }
}
BENCHMARK(BM_BiasIvf)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
