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

#include "nnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nnn/error.hpp"
#include "nnn/kernels.hpp"
#include "nnn/rng.hpp"
#include "nnn/vector_index.hpp"

namespace nnn {

std::vector<std::uint8_t> per_query_hits(const RankingTable& table, const GroundTruth& truth,
                                         std::size_t K) {
    NNN_CHECK(K >= 1, ErrorCode::kInvalidArgument, "K must be >= 1");
    std::vector<std::uint8_t> hits(table.size(), 0);
    for (std::size_t q = 0; q < table.size(); ++q) {
        const auto* correct = truth.find(q);
        NNN_CHECK(correct != nullptr && !correct->empty(), ErrorCode::kMissingTruth,
                  "query " + std::to_string(q));
        const auto& row = table[q];
        const std::size_t depth = std::min(K, row.size());
        for (std::size_t r = 0; r < depth; ++r) {
            if (std::find(correct->begin(), correct->end(),
                          static_cast<std::size_t>(row[r].candidate)) != correct->end()) {
                hits[q] = 1;
                break;
            }
        }
    }
    return hits;
}

double recall_at_k(const RankingTable& table, const GroundTruth& truth, std::size_t K) {
    const auto hits = per_query_hits(table, truth, K);
    if (hits.empty()) return 0.0;
    const std::size_t n_hit = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    return static_cast<double>(n_hit) / static_cast<double>(hits.size());
}

namespace {

/// Linear interpolation between closest ranks of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval bootstrap_ci(std::span<const std::uint8_t> hits, std::size_t resamples,
                      std::uint64_t seed, double level) {
    NNN_CHECK(!hits.empty(), ErrorCode::kEmptyInput, "bootstrap needs at least one query");
    NNN_CHECK(resamples >= 1, ErrorCode::kInvalidArgument, "resamples must be >= 1");
    NNN_CHECK(level > 0.0 && level < 1.0, ErrorCode::kInvalidArgument, "level must lie in (0, 1)");
    const std::size_t n = hits.size();
    const std::size_t total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    const double point = static_cast<double>(total) / static_cast<double>(n);

    Rng rng(seed);
    std::vector<double> means(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) count += hits[rng.uniform_index(n)];
        means[b] = static_cast<double>(count) / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - level) / 2.0;
    Interval ci{quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
    ci.lo = std::clamp(std::min(ci.lo, point), 0.0, 1.0);
    ci.hi = std::clamp(std::max(ci.hi, point), 0.0, 1.0);
    return ci;
}

RecallReport recall_report(const RankingTable& table, const GroundTruth& truth,
                           std::span<const std::size_t> ks,
                           const std::optional<BootstrapParams>& bootstrap,
                           const NormalizationSpec& method) {
    RecallReport report;
    report.n_queries = table.size();
    report.method = method;
    for (std::size_t K : ks) {
        const auto hits = per_query_hits(table, truth, K);
        const std::size_t n_hit = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
        report.r_at[K] = hits.empty() ? 0.0 : static_cast<double>(n_hit) / static_cast<double>(hits.size());
        if (bootstrap && !hits.empty()) {
            report.ci[K] = bootstrap_ci(hits, bootstrap->resamples, bootstrap->seed, bootstrap->level);
        }
    }
    return report;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.25 + 0.125 * i);
    return grid;
}

std::vector<std::size_t> default_k_grid() {
    std::vector<std::size_t> grid;
    for (std::size_t k = 1; k <= 512; k *= 2) grid.push_back(k);
    return grid;
}

HoldoutSplit holdout_split(std::size_t pool_rows, std::size_t holdout_size, std::uint64_t seed) {
    NNN_CHECK(holdout_size >= 1, ErrorCode::kInvalidArgument, "holdout size must be >= 1");
    NNN_CHECK(pool_rows >= 2 * holdout_size, ErrorCode::kInsufficientData,
              "reference pool of " + std::to_string(pool_rows) + " rows cannot hold out " +
                  std::to_string(holdout_size) + " and keep as many");
    std::vector<std::size_t> order(pool_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    HoldoutSplit split;
    split.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout_size));
    split.remaining.assign(order.begin() + static_cast<std::ptrdiff_t>(holdout_size), order.end());
    std::sort(split.holdout.begin(), split.holdout.end());
    std::sort(split.remaining.begin(), split.remaining.end());
    return split;
}

namespace {

bool better_cell(const SweepCell& a, const SweepCell& b) {
    if (a.recall_at_1 != b.recall_at_1) return a.recall_at_1 > b.recall_at_1;
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.k < b.k;
}

/// Index of the best debiased score: highest, ties to the lowest index.
std::size_t top1_debiased(std::span<const double> raw, std::span<const float> bias) {
    std::size_t best = 0;
    double best_score = raw[0] - static_cast<double>(bias[0]);
    for (std::size_t j = 1; j < raw.size(); ++j) {
        const double s = raw[j] - static_cast<double>(bias[j]);
        if (s > best_score) {
            best_score = s;
            best = j;
        }
    }
    return best;
}

}  // namespace

SweepResult sweep_nnn(const SweepInputs& in) {
    NNN_CHECK(in.queries && in.candidates && in.ref_queries, ErrorCode::kInvalidArgument,
              "sweep needs queries, candidates, and reference queries");
    NNN_CHECK(!in.grid_alpha.empty() && !in.grid_k.empty(), ErrorCode::kInvalidArgument,
              "sweep grids must be non-empty");
    for (double a : in.grid_alpha) {
        NNN_CHECK(a >= 0.0 && std::isfinite(a), ErrorCode::kInvalidArgument, "alpha must be >= 0");
    }
    for (std::size_t k : in.grid_k) NNN_CHECK(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
    const EmbeddingMatrix& candidates = *in.candidates;
    NNN_CHECK(candidates.rows() >= 1, ErrorCode::kInsufficientData, "no candidates");

    // Resolve the validation set and the reference set.
    EmbeddingMatrix validation;
    EmbeddingMatrix references;
    GroundTruth validation_truth;
    if (in.reference_truth != nullptr) {
        const auto split = holdout_split(in.ref_queries->rows(), in.queries->rows(), in.split_seed);
        validation = in.ref_queries->select_rows(split.holdout);
        references = in.ref_queries->select_rows(split.remaining);
        for (std::size_t i = 0; i < split.holdout.size(); ++i) {
            const auto* c = in.reference_truth->find(split.holdout[i]);
            NNN_CHECK(c != nullptr, ErrorCode::kMissingTruth,
                      "reference query " + std::to_string(split.holdout[i]));
            validation_truth.correct[i] = *c;
        }
    } else {
        NNN_CHECK(in.truth != nullptr, ErrorCode::kInvalidArgument, "sweep needs ground truth");
        validation = *in.queries;
        references = *in.ref_queries;
        validation_truth = *in.truth;
    }
    NNN_CHECK(validation.rows() >= 1, ErrorCode::kInsufficientData, "empty validation set");
    NNN_CHECK(references.rows() >= 1, ErrorCode::kEmptyReferenceSet, "empty reference set");
    NNN_CHECK(validation.dim() == candidates.dim() && references.dim() == candidates.dim(),
              ErrorCode::kDimMismatch, "sweep inputs differ in dimension");
    validation_truth.validate(validation.rows(), candidates.rows());
    for (std::size_t q = 0; q < validation.rows(); ++q) {
        NNN_CHECK(validation_truth.find(q) != nullptr, ErrorCode::kMissingTruth,
                  "query " + std::to_string(q));
    }

    // Mean of the top-k reference scores per candidate, for every k in the grid,
    // summed in hit order exactly as compute_bias does.
    const std::size_t k_max = std::min(*std::max_element(in.grid_k.begin(), in.grid_k.end()),
                                       references.rows());
    const RankingTable nearest = VectorIndex::build_exact(references).batch_search(candidates, k_max);
    const std::size_t n_cand = candidates.rows();
    const std::size_t n_cells = in.grid_alpha.size() * in.grid_k.size();
    std::vector<float> biases((n_cells + 1) * n_cand, 0.0F);  // last slot: raw
    for (std::size_t ki = 0; ki < in.grid_k.size(); ++ki) {
        const std::size_t k_used = std::min(in.grid_k[ki], references.rows());
        for (std::size_t c = 0; c < n_cand; ++c) {
            double sum = 0.0;
            for (std::size_t h = 0; h < k_used; ++h) sum += nearest[c][h].score;
            const double mean = sum / static_cast<double>(k_used);
            for (std::size_t ai = 0; ai < in.grid_alpha.size(); ++ai) {
                const std::size_t cell = ai * in.grid_k.size() + ki;
                biases[cell * n_cand + c] = static_cast<float>(in.grid_alpha[ai] * mean);
            }
        }
    }

    const kernels::PackedRows packed(candidates);
    std::vector<std::size_t> hits(n_cells + 1, 0);
#pragma omp parallel
    {
        std::vector<double> raw(n_cand);
        std::vector<std::size_t> local(n_cells + 1, 0);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t qq = 0; qq < static_cast<std::int64_t>(validation.rows()); ++qq) {
            const auto q = static_cast<std::size_t>(qq);
            kernels::scan_all(validation.row(q).data(), packed, raw);
            const auto& correct = *validation_truth.find(q);
            for (std::size_t cell = 0; cell <= n_cells; ++cell) {
                const std::size_t top = top1_debiased(
                    raw, std::span<const float>(biases.data() + cell * n_cand, n_cand));
                if (std::find(correct.begin(), correct.end(), top) != correct.end()) ++local[cell];
            }
        }
#pragma omp critical
        for (std::size_t cell = 0; cell <= n_cells; ++cell) hits[cell] += local[cell];
    }

    SweepResult result;
    result.split_seed = in.split_seed;
    result.n_validation = validation.rows();
    result.n_reference = references.rows();
    const auto n_val = static_cast<double>(validation.rows());
    for (std::size_t ai = 0; ai < in.grid_alpha.size(); ++ai) {
        for (std::size_t ki = 0; ki < in.grid_k.size(); ++ki) {
            const std::size_t cell = ai * in.grid_k.size() + ki;
            result.grid.push_back({in.grid_alpha[ai], in.grid_k[ki],
                                   static_cast<double>(hits[cell]) / n_val});
        }
    }
    result.raw_recall_at_1 = static_cast<double>(hits[n_cells]) / n_val;
    result.best = result.grid.front();
    for (const SweepCell& cell : result.grid) {
        if (better_cell(cell, result.best)) result.best = cell;
    }
    return result;
}

std::vector<std::size_t> ablation_subset(std::size_t pool_rows, double fraction,
                                         std::uint64_t seed) {
    NNN_CHECK(fraction > 0.0 && fraction <= 1.0, ErrorCode::kInvalidArgument,
              "fraction must lie in (0, 1]");
    std::vector<std::size_t> order(pool_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool_rows)));
    NNN_CHECK(keep >= 1, ErrorCode::kEmptyReferenceSet,
              "fraction " + std::to_string(fraction) + " of " + std::to_string(pool_rows) +
                  " references keeps none");
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<AblationPoint> ablate_reference(const AblationInputs& in, const NormalizationSpec& spec) {
    NNN_CHECK(in.queries && in.candidates && in.ref_queries && in.truth, ErrorCode::kInvalidArgument,
              "ablation needs queries, candidates, reference queries, and truth");
    NNN_CHECK(!in.ks.empty(), ErrorCode::kInvalidArgument, "ablation needs at least one K");
    const std::size_t depth = *std::max_element(in.ks.begin(), in.ks.end());
    std::vector<AblationPoint> points;
    for (double fraction : in.fractions) {
        const auto subset = ablation_subset(in.ref_queries->rows(), fraction, in.seed);
        const EmbeddingMatrix refs = in.ref_queries->select_rows(subset);
        ApplyInputs apply_in;
        apply_in.queries = in.queries;
        apply_in.candidates = in.candidates;
        apply_in.ref_queries = &refs;
        apply_in.ref_candidates = in.ref_candidates;
        apply_in.depth = depth;
        auto ranked = apply(spec, apply_in);
        AblationPoint point;
        point.fraction = fraction;
        point.n_reference = refs.rows();
        for (std::size_t K : in.ks) point.r_at[K] = recall_at_k(ranked.table, *in.truth, K);
        point.warnings = std::move(ranked.warnings);
        points.push_back(std::move(point));
    }
    return points;
}

namespace {

const CandidateLabel& label_of(const AttributeLabels& labels, std::uint32_t candidate) {
    const auto it = labels.find(candidate);
    NNN_CHECK(it != labels.end(), ErrorCode::kUnlabeledCandidate,
              "candidate " + std::to_string(candidate));
    return it->second;
}

void check_depth(const RankingTable& table, std::size_t n) {
    NNN_CHECK(n >= 1, ErrorCode::kInvalidArgument, "n must be >= 1");
    for (std::size_t q = 0; q < table.size(); ++q) {
        NNN_CHECK(table[q].size() >= n, ErrorCode::kInvalidArgument,
                  "query " + std::to_string(q) + " ranks " + std::to_string(table[q].size()) +
                      " candidates, need " + std::to_string(n));
    }
}

const std::string& group_of(const QueryGroups& groups, std::size_t q) {
    const auto it = groups.find(q);
    NNN_CHECK(it != groups.end(), ErrorCode::kInvalidArgument,
              "query " + std::to_string(q) + " has no group");
    return it->second;
}

}  // namespace

AttributeBiasReport attribute_bias(const RankingTable& table, const AttributeLabels& labels,
                                   std::size_t n, const QueryGroups* query_groups) {
    check_depth(table, n);
    AttributeBiasReport report;
    report.per_query.resize(table.size());
    std::map<std::string, std::pair<double, std::size_t>> sums;
    double total = 0.0;
    for (std::size_t q = 0; q < table.size(); ++q) {
        long balance = 0;
        for (std::size_t r = 0; r < n; ++r) {
            balance += label_of(labels, table[q][r].candidate).attribute == Attribute::kA ? 1 : -1;
        }
        const double bias = static_cast<double>(balance) / static_cast<double>(n);
        report.per_query[q] = bias;
        total += bias;
        const std::string group = query_groups ? group_of(*query_groups, q) : std::string("all");
        sums[group].first += bias;
        ++sums[group].second;
    }
    for (const auto& [group, acc] : sums) {
        report.per_group[group] = acc.first / static_cast<double>(acc.second);
    }
    report.mean_bias = table.size() == 0 ? 0.0 : total / static_cast<double>(table.size());
    return report;
}

double attribute_precision(const RankingTable& table, const AttributeLabels& labels,
                           const QueryGroups& query_groups, std::size_t n) {
    check_depth(table, n);
    if (table.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t q = 0; q < table.size(); ++q) {
        const std::string& want = group_of(query_groups, q);
        std::size_t matching = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (label_of(labels, table[q][r].candidate).group == want) ++matching;
        }
        total += static_cast<double>(matching) / static_cast<double>(n);
    }
    return total / static_cast<double>(table.size());
}

}  // namespace nnn
