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
#include <numeric>

#include "nnn/diagnostics.hpp"
#include "test_util.hpp"

namespace nnn {
namespace {

RankingTable top1_table(const std::vector<std::uint32_t>& top1) {
    RankingTable t;
    for (auto c : top1) t.queries.push_back({SearchHit{c, 1.0}});
    return t;
}

// Central moments computed directly, independent of the library.
struct Moments {
    double kurtosis;
    double mae;
};

Moments moment_oracle(const std::vector<std::size_t>& counts) {
    const double n = static_cast<double>(counts.size());
    double mean = 0.0;
    for (auto c : counts) mean += static_cast<double>(c) / n;
    double m2 = 0.0;
    double m4 = 0.0;
    double mae = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - mean;
        m2 += d * d / n;
        m4 += d * d * d * d / n;
        mae += std::abs(d) / n;
    }
    return {m4 / (m2 * m2) - 3.0, mae};
}

TEST_CASE("matched counts") {
    const auto mc = matched_counts(top1_table({0, 0, 0, 0}), 3);
    CHECK(mc.counts == std::vector<std::size_t>{4, 0, 0});
    CHECK(mc.total_queries == 4);
    CHECK(matched_counts(RankingTable{}, 3).counts == std::vector<std::size_t>{0, 0, 0});
    CHECK_NNN_ERROR(matched_counts(top1_table({0, 3}), 3), ErrorCode::kIndexOutOfRange);

    Rng rng(4);
    std::vector<std::uint32_t> top1(777);
    for (auto& c : top1) c = static_cast<std::uint32_t>(rng.uniform_index(50));
    const auto big = matched_counts(top1_table(top1), 50);
    CHECK(std::accumulate(big.counts.begin(), big.counts.end(), std::size_t{0}) == 777);
}

TEST_CASE("hub report") {
    SUBCASE("mae of 1,1,1,5") {
        const auto r = hub_report({{1, 1, 1, 5}, 8});
        CHECK(r.mae == doctest::Approx(1.5));
        CHECK(r.max == 5);
        CHECK(r.histogram == std::map<std::size_t, std::size_t>{{1, 3}, {5, 1}});
    }
    SUBCASE("flat counts are degenerate") {
        CHECK_NNN_ERROR(hub_report({{2, 2, 2, 2}, 8}), ErrorCode::kDegenerateDistribution);
        CHECK_NNN_ERROR(hub_report({{7}, 7}), ErrorCode::kDegenerateDistribution);
    }
    SUBCASE("one spike against the moment oracle") {
        const std::vector<std::size_t> counts = {0, 0, 0, 0, 20};
        const auto r = hub_report({counts, 20});
        const auto o = moment_oracle(counts);
        CHECK(r.kurtosis == doctest::Approx(o.kurtosis).epsilon(1e-12));
        CHECK(r.kurtosis == doctest::Approx(0.25));
        CHECK(r.mae == doctest::Approx(o.mae));
        CHECK(r.max == 20);
    }
    SUBCASE("permutation invariance and oracle on random counts") {
        Rng rng(8);
        std::vector<std::size_t> counts(60);
        for (auto& c : counts) c = rng.uniform_index(9) + (rng.bernoulli(0.05) ? 40 : 0);
        const auto r = hub_report({counts, 0});
        const auto o = moment_oracle(counts);
        CHECK(r.kurtosis == doctest::Approx(o.kurtosis).epsilon(1e-12));
        CHECK(r.mae == doctest::Approx(o.mae).epsilon(1e-12));
        rng.shuffle(std::span<std::size_t>(counts));
        const auto p = hub_report({counts, 0});
        CHECK(p.kurtosis == doctest::Approx(r.kurtosis).epsilon(1e-12));
        CHECK(p.mae == doctest::Approx(r.mae).epsilon(1e-12));
        CHECK(p.max == r.max);
    }
}

TEST_CASE("compare reports") {
    const auto a = hub_report({{1, 1, 1, 5}, 8});
    const auto same = compare_reports(a, a);
    CHECK(same.kurtosis_delta == 0.0);
    CHECK(same.mae_delta == 0.0);
    CHECK(same.max_delta == 0.0);
    CHECK(same.max_ratio == 1.0);
    const auto b = hub_report({{2, 2, 1, 3}, 8});
    const auto d = compare_reports(a, b);
    CHECK(d.max_delta == -2.0);
    CHECK(d.mae_delta == doctest::Approx(b.mae - a.mae));
    CHECK(d.mae_ratio == doctest::Approx(b.mae / a.mae));
    HubReport zero;
    CHECK(std::isnan(compare_reports(zero, a).mae_ratio));
}

}  // namespace
}  // namespace nnn
