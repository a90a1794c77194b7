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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nnn/kernels.hpp"
#include "nnn/ranking.hpp"
#include "test_util.hpp"

namespace nnn {
namespace {

using testing::random_matrix;

TEST_CASE("TopK keeps the best hits with index tie-break") {
    kernels::TopK top(3);
    top.push(5, 1.0);
    top.push(2, 1.0);
    top.push(9, 3.0);
    top.push(1, 0.5);
    top.push(0, 1.0);
    const auto hits = top.take_sorted();
    REQUIRE(hits.size() == 3);
    CHECK(hits[0] == SearchHit{9, 3.0});
    CHECK(hits[1] == SearchHit{0, 1.0});
    CHECK(hits[2] == SearchHit{2, 1.0});
    CHECK(top.size() == 0);
}

TEST_CASE("packed top-k equals the serial double loop exactly") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + rng.uniform_index(40);
        const auto rows = random_matrix(rng, 1 + rng.uniform_index(300), dim, trial % 2 == 0);
        const auto queries = random_matrix(rng, 1 + rng.uniform_index(30), dim, trial % 2 == 0);
        const std::size_t k = 1 + rng.uniform_index(rows.rows() + 5);
        const auto fast = kernels::topk_search(queries, kernels::PackedRows(rows), k);
        const auto slow = kernels::reference::topk_search(queries, rows, k);
        CHECK(fast == slow);
    }
}

TEST_CASE("packed scores are bit-identical to dot") {
    Rng rng(4);
    const auto rows = random_matrix(rng, 37, 13, false);
    const auto queries = random_matrix(rng, 5, 13, false);
    const auto fast = kernels::score_matrix(queries, rows);
    const auto slow = kernels::reference::score_matrix(queries, rows);
    CHECK(fast == slow);
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        for (std::size_t j = 0; j < rows.rows(); ++j) {
            CHECK(fast[i * rows.rows() + j] == kernels::dot(queries.row(i), rows.row(j)));
        }
    }
}

TEST_CASE("duplicate rows tie and rank by index") {
    const EmbeddingMatrix rows(3, 2, {0.6F, 0.8F, 0.6F, 0.8F, 1.0F, 0.0F}, true);
    const EmbeddingMatrix q(1, 2, {0.6F, 0.8F}, true);
    const auto hits = kernels::topk_search(q, kernels::PackedRows(rows), 3)[0];
    CHECK(hits[0].candidate == 0);
    CHECK(hits[1].candidate == 1);
    CHECK(hits[0].score == hits[1].score);
}

TEST_CASE("log-sum-exp matches the serial reference and survives large beta") {
    Rng rng(21);
    const auto rows = random_matrix(rng, 41, 8);
    const auto refs = random_matrix(rng, 19, 8);
    for (double beta : {0.0, 1.0, 50.0, 400.0, 5000.0}) {
        const auto fast = kernels::logsumexp_rows(rows, refs, beta);
        const auto slow = kernels::reference::logsumexp_rows(rows, refs, beta);
        REQUIRE(fast.size() == rows.rows());
        for (std::size_t j = 0; j < fast.size(); ++j) {
            CHECK(std::isfinite(fast[j]));
            CHECK(fast[j] == doctest::Approx(slow[j]).epsilon(1e-12));
        }
    }
    // beta = 0 gives log(|refs|).
    const auto zero = kernels::logsumexp_rows(rows, refs, 0.0);
    CHECK(zero[0] == doctest::Approx(std::log(19.0)));
}

TEST_CASE("rank_scores and jsonl round trip") {
    const std::vector<double> scores = {0.5, 2.0, 0.5, -1.0};
    const auto hits = rank_scores(scores, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].candidate == 1);
    CHECK(hits[1].candidate == 0);
    CHECK(hits[2].candidate == 2);
    CHECK(rank_scores(scores, 10).size() == 4);

    RankingTable table;
    table.queries = {hits, {}, {{3, -0.1}, {0, -0.30000000000000004}}};
    const auto text = to_jsonl(table);
    CHECK(text.substr(0, 10) == "{\"query\":0");
    CHECK(parse_jsonl(text) == table);
    CHECK_NNN_ERROR(parse_jsonl("{\"query\":1,\"hits\":[]}\n"), ErrorCode::kParseError);
    CHECK_NNN_ERROR(parse_jsonl("not json\n"), ErrorCode::kParseError);
}

}  // namespace
}  // namespace nnn
