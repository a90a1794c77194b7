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
#include <set>

#include "nnn/evaluation.hpp"
#include "nnn/synthetic.hpp"
#include "test_util.hpp"

namespace nnn {
namespace {

using testing::random_matrix;

RankingTable table_of(const std::vector<std::vector<std::uint32_t>>& rows) {
    RankingTable t;
    for (const auto& r : rows) {
        std::vector<SearchHit> hits;
        double score = 1.0;
        for (auto c : r) hits.push_back({c, score -= 0.01});
        t.queries.push_back(std::move(hits));
    }
    return t;
}

TEST_CASE("recall at k") {
    const auto t = table_of({{4, 1, 2, 3, 0}, {0, 1, 2, 3, 4}});
    GroundTruth gt;
    gt.correct = {{0, {4}}, {1, {2}}};
    CHECK(recall_at_k(t, gt, 1) == 0.5);
    CHECK(recall_at_k(t, gt, 5) == 1.0);
    CHECK(recall_at_k(t, gt, 2) == 0.5);
    CHECK(recall_at_k(t, gt, 3) == 1.0);

    GroundTruth missing;
    missing.correct = {{0, {4}}};
    CHECK_NNN_ERROR(recall_at_k(t, missing, 1), ErrorCode::kMissingTruth);

    // Multi-answer truth counts a hit on any answer.
    GroundTruth multi;
    multi.correct = {{0, {9, 1}}, {1, {4, 0}}};
    CHECK(recall_at_k(t, multi, 1) == 0.5);
    CHECK(recall_at_k(t, multi, 2) == 1.0);
}

TEST_CASE("recall equals a membership scan and is monotone in K") {
    Rng rng(13);
    RankingTable t;
    GroundTruth gt;
    for (std::size_t q = 0; q < 200; ++q) {
        std::vector<std::uint32_t> perm(30);
        for (std::uint32_t i = 0; i < 30; ++i) perm[i] = i;
        rng.shuffle(std::span<std::uint32_t>(perm));
        std::vector<SearchHit> hits;
        for (std::size_t r = 0; r < 20; ++r) hits.push_back({perm[r], 1.0 - 0.01 * static_cast<double>(r)});
        t.queries.push_back(hits);
        std::set<std::size_t> answers;
        const std::size_t n_answers = 1 + rng.uniform_index(3);
        while (answers.size() < n_answers) answers.insert(rng.uniform_index(30));
        gt.correct[q] = {answers.begin(), answers.end()};
    }
    double previous = 0.0;
    for (std::size_t K = 1; K <= 20; ++K) {
        std::size_t hit = 0;
        for (std::size_t q = 0; q < 200; ++q) {
            bool found = false;
            for (std::size_t r = 0; r < K; ++r) {
                for (auto a : gt.correct[q]) found = found || t[q][r].candidate == a;
            }
            hit += found;
        }
        const double r = recall_at_k(t, gt, K);
        CHECK(r == static_cast<double>(hit) / 200.0);
        CHECK(r >= previous);
        previous = r;
    }
}

TEST_CASE("bootstrap intervals") {
    const std::vector<std::uint8_t> ones(100, 1);
    const std::vector<std::uint8_t> zeros(100, 0);
    const auto a = bootstrap_ci(ones, 1000, 42, 0.95);
    CHECK(a.lo == 1.0);
    CHECK(a.hi == 1.0);
    const auto b = bootstrap_ci(zeros, 1000, 42, 0.95);
    CHECK(b.lo == 0.0);
    CHECK(b.hi == 0.0);
    CHECK_NNN_ERROR(bootstrap_ci(std::vector<std::uint8_t>{}, 10, 1, 0.95), ErrorCode::kEmptyInput);

    Rng rng(5000);
    std::vector<std::uint8_t> coin(5000);
    for (auto& h : coin) h = rng.bernoulli(0.5) ? 1 : 0;
    const double point = std::count(coin.begin(), coin.end(), 1) / 5000.0;
    const auto ci = bootstrap_ci(coin, 1000, 42, 0.95);
    const double analytic = 2.0 * 1.96 * std::sqrt(0.25 / 5000.0);
    CHECK(ci.hi - ci.lo <= 2.0 * analytic);
    CHECK(ci.hi - ci.lo >= analytic / 2.0);
    CHECK(ci.lo <= point);
    CHECK(point <= ci.hi);
    const auto again = bootstrap_ci(coin, 1000, 42, 0.95);
    CHECK(again.lo == ci.lo);
    CHECK(again.hi == ci.hi);

    // Brackets the point estimate even with a single resample.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::vector<std::uint8_t> few = {1, 0, 0};
        const auto c = bootstrap_ci(few, 1, seed, 0.95);
        CHECK(c.lo <= 1.0 / 3.0);
        CHECK(c.hi >= 1.0 / 3.0);
    }
}

TEST_CASE("recall report") {
    const auto t = table_of({{4, 1, 2}, {0, 1, 2}});
    GroundTruth gt;
    gt.correct = {{0, {4}}, {1, {2}}};
    const std::vector<std::size_t> ks = {1, 3};
    const auto r = recall_report(t, gt, ks, BootstrapParams{}, NormalizationSpec::none());
    CHECK(r.r_at.at(1) == 0.5);
    CHECK(r.r_at.at(3) == 1.0);
    CHECK(r.n_queries == 2);
    CHECK(r.ci.at(1).lo <= 0.5);
    CHECK(r.ci.at(1).hi >= 0.5);
    CHECK(recall_report(t, gt, ks, std::nullopt, NormalizationSpec::none()).ci.empty());
}

TEST_CASE("default grids") {
    const auto alphas = default_alpha_grid();
    const auto ks = default_k_grid();
    REQUIRE(alphas.size() == 11);
    REQUIRE(ks.size() == 10);
    for (std::size_t i = 0; i < 11; ++i) CHECK(alphas[i] == 0.25 + 0.125 * static_cast<double>(i));
    for (std::size_t i = 0; i < 10; ++i) CHECK(ks[i] == std::size_t{1} << i);
}

struct HubFixture {
    RetrievalProblem p;
    double raw = 0.0;

    explicit HubFixture(std::uint64_t seed) {
        SyntheticHubConfig cfg;
        cfg.seed = seed;
        p = make_synthetic_hub(cfg);
        ApplyInputs in;
        in.queries = &p.test_queries;
        in.candidates = &p.candidates;
        raw = recall_at_k(apply(NormalizationSpec::none(), in).table, p.test_truth, 1);
    }

    SweepInputs sweep() const {
        SweepInputs in;
        in.queries = &p.test_queries;
        in.candidates = &p.candidates;
        in.ref_queries = &p.ref_queries;
        in.truth = &p.test_truth;
        return in;
    }
};

TEST_CASE("sweep") {
    const HubFixture fx(1);
    SUBCASE("default grid is 110 cells and best is the first maximum") {
        const auto res = sweep_nnn(fx.sweep());
        REQUIRE(res.grid.size() == 110);
        CHECK(res.raw_recall_at_1 == fx.raw);
        const auto best = std::max_element(res.grid.begin(), res.grid.end(), [](const SweepCell& a, const SweepCell& b) {
            return a.recall_at_1 < b.recall_at_1;
        });
        CHECK(res.best.alpha == best->alpha);
        CHECK(res.best.k == best->k);
        CHECK(res.best.recall_at_1 > fx.raw);

        // Cells agree with a direct evaluation.
        for (const SweepCell& c : {res.grid.front(), res.grid[57], res.grid.back()}) {
            ApplyInputs in;
            in.queries = &fx.p.test_queries;
            in.candidates = &fx.p.candidates;
            in.ref_queries = &fx.p.ref_queries;
            in.depth = 1;
            CHECK(recall_at_k(apply(NormalizationSpec::nnn(c.alpha, c.k), in).table, fx.p.test_truth, 1) ==
                  c.recall_at_1);
        }
    }
    SUBCASE("alpha zero reproduces raw") {
        auto in = fx.sweep();
        in.grid_alpha = {0.0};
        in.grid_k = {1};
        const auto res = sweep_nnn(in);
        CHECK(res.best.alpha == 0.0);
        CHECK(res.best.k == 1);
        CHECK(res.best.recall_at_1 == fx.raw);
    }
    SUBCASE("ties prefer smaller alpha then smaller k") {
        auto in = fx.sweep();
        in.grid_alpha = {0.0, 0.0};
        in.grid_k = {4, 2, 8};
        const auto res = sweep_nnn(in);
        CHECK(res.best.k == 2);
    }
    SUBCASE("holdout split from the reference pool") {
        auto in = fx.sweep();
        in.truth = nullptr;
        in.reference_truth = &fx.p.ref_truth;
        in.grid_alpha = {0.75};
        in.grid_k = {16};
        // 500 references cannot supply a 500-query holdout and keep as many.
        CHECK_NNN_ERROR(sweep_nnn(in), ErrorCode::kInsufficientData);

        SyntheticHubConfig cfg;
        cfg.n_reference = 1200;
        cfg.n_test = 300;
        const auto p = make_synthetic_hub(cfg);
        SweepInputs ok;
        ok.queries = &p.test_queries;
        ok.candidates = &p.candidates;
        ok.ref_queries = &p.ref_queries;
        ok.reference_truth = &p.ref_truth;
        const auto res = sweep_nnn(ok);
        CHECK(res.n_validation == 300);
        CHECK(res.n_reference == 900);
        CHECK(res.best.recall_at_1 > res.raw_recall_at_1);
    }
    SUBCASE("holdout split is seeded and disjoint") {
        const auto a = holdout_split(100, 30, 7);
        const auto b = holdout_split(100, 30, 7);
        CHECK(a.holdout == b.holdout);
        CHECK(a.holdout.size() == 30);
        CHECK(a.remaining.size() == 70);
        std::vector<std::size_t> all = a.holdout;
        all.insert(all.end(), a.remaining.begin(), a.remaining.end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
        CHECK(holdout_split(100, 30, 8).holdout != a.holdout);
        CHECK_NNN_ERROR(holdout_split(59, 30, 1), ErrorCode::kInsufficientData);
    }
}

TEST_CASE("ablation") {
    SUBCASE("subsets are nested") {
        const auto s10 = ablation_subset(1000, 0.1, 3);
        const auto s20 = ablation_subset(1000, 0.2, 3);
        const auto s50 = ablation_subset(1000, 0.5, 3);
        const auto s100 = ablation_subset(1000, 1.0, 3);
        CHECK(s10.size() == 100);
        CHECK(s100.size() == 1000);
        CHECK(std::includes(s20.begin(), s20.end(), s10.begin(), s10.end()));
        CHECK(std::includes(s50.begin(), s50.end(), s20.begin(), s20.end()));
        CHECK(std::includes(s100.begin(), s100.end(), s50.begin(), s50.end()));
        CHECK_NNN_ERROR(ablation_subset(10, 0.01, 3), ErrorCode::kEmptyReferenceSet);
        CHECK_NNN_ERROR(ablation_subset(10, 1.5, 3), ErrorCode::kInvalidArgument);
        CHECK_NNN_ERROR(ablation_subset(10, 0.0, 3), ErrorCode::kInvalidArgument);
    }
    const HubFixture fx(2);
    AblationInputs in;
    in.queries = &fx.p.test_queries;
    in.candidates = &fx.p.candidates;
    in.ref_queries = &fx.p.ref_queries;
    in.truth = &fx.p.test_truth;
    in.fractions = {0.1, 0.5, 1.0, 0.002};
    const auto spec = NormalizationSpec::nnn(0.75, 16);
    const auto pts = ablate_reference(in, spec);
    REQUIRE(pts.size() == 4);
    for (std::size_t i = 0; i < 3; ++i) CHECK(pts[i].r_at.at(1) > fx.raw);

    ApplyInputs full;
    full.queries = &fx.p.test_queries;
    full.candidates = &fx.p.candidates;
    full.ref_queries = &fx.p.ref_queries;
    full.depth = 10;
    CHECK(pts[2].r_at.at(5) == recall_at_k(apply(spec, full).table, fx.p.test_truth, 5));
    CHECK(pts[2].n_reference == 500);

    // 0.2% of 500 is one reference query: k clamps with a warning.
    CHECK(pts[3].n_reference == 1);
    CHECK(pts[3].warnings.size() == 1);
}

TEST_CASE("attribute bias and precision") {
    AttributeLabels labels;
    for (std::size_t c = 0; c < 12; ++c) {
        labels[c] = {c < 6 ? Attribute::kA : Attribute::kB, c % 2 == 0 ? "doctor" : "nurse"};
    }
    // Query 0: 5 A then 1 B. Query 1: 3 A and 3 B.
    const auto t = table_of({{0, 1, 2, 3, 4, 6}, {0, 7, 1, 8, 2, 9}});
    const auto r = attribute_bias(t, labels, 6);
    REQUIRE(r.per_query.size() == 2);
    CHECK(r.per_query[0] == doctest::Approx(4.0 / 6.0));
    CHECK(r.per_query[1] == 0.0);
    CHECK(r.mean_bias == doctest::Approx(2.0 / 6.0));
    CHECK(r.per_group.at("all") == doctest::Approx(2.0 / 6.0));

    AttributeLabels flipped = labels;
    for (auto& [c, l] : flipped) l.attribute = l.attribute == Attribute::kA ? Attribute::kB : Attribute::kA;
    const auto f = attribute_bias(t, flipped, 6);
    for (std::size_t q = 0; q < 2; ++q) CHECK(f.per_query[q] == -r.per_query[q]);

    const QueryGroups groups = {{0, "doctor"}, {1, "nurse"}};
    const auto g = attribute_bias(t, labels, 6, &groups);
    CHECK(g.per_group.at("doctor") == doctest::Approx(4.0 / 6.0));
    CHECK(g.per_group.at("nurse") == 0.0);

    // Query 0 top-6 groups: d n d n d d -> 4 doctors; query 1: d n n d d n -> 3 nurses.
    CHECK(attribute_precision(t, labels, groups, 6) == doctest::Approx((4.0 / 6.0 + 3.0 / 6.0) / 2.0));
    const QueryGroups all_doctor = {{0, "doctor"}, {1, "doctor"}};
    const auto evens = table_of({{0, 2, 4}, {6, 8, 10}});
    CHECK(attribute_precision(evens, labels, all_doctor, 3) == 1.0);
    const QueryGroups all_nurse = {{0, "nurse"}, {1, "nurse"}};
    CHECK(attribute_precision(evens, labels, all_nurse, 3) == 0.0);

    AttributeLabels partial = labels;
    partial.erase(9);
    CHECK_NNN_ERROR(attribute_bias(t, partial, 6), ErrorCode::kUnlabeledCandidate);
    CHECK_NNN_ERROR(attribute_bias(t, labels, 7), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace nnn
