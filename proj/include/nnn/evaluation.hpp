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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nnn/embed_io.hpp"
#include "nnn/matrix.hpp"
#include "nnn/normalization.hpp"
#include "nnn/ranking.hpp"

namespace nnn {

// ---- Recall ---------------------------------------------------------------

/// hits[q] = 1 when any correct candidate of query q is in its top K.
/// Throws MissingTruth for a query without ground truth.
std::vector<std::uint8_t> per_query_hits(const RankingTable& table, const GroundTruth& truth,
                                         std::size_t K);

/// Fraction of queries with a correct candidate in the top K (0 for an empty
/// table).
double recall_at_k(const RankingTable& table, const GroundTruth& truth, std::size_t K);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct BootstrapParams {
    std::size_t resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 42;
};

/// Percentile bootstrap of the mean over query resampling with replacement.
/// The interval is widened, if needed, to contain the sample mean.
Interval bootstrap_ci(std::span<const std::uint8_t> hits, std::size_t resamples,
                      std::uint64_t seed, double level);

struct RecallReport {
    std::map<std::size_t, double> r_at;
    std::map<std::size_t, Interval> ci;
    std::size_t n_queries = 0;
    NormalizationSpec method;
};

/// R@K for every K, with a bootstrap interval per K when `bootstrap` is set.
/// Each K's interval uses `bootstrap->seed` so reports are reproducible.
RecallReport recall_report(const RankingTable& table, const GroundTruth& truth,
                           std::span<const std::size_t> ks,
                           const std::optional<BootstrapParams>& bootstrap,
                           const NormalizationSpec& method);

// ---- Hyperparameter sweep -------------------------------------------------

/// {0.25, 0.375, ..., 1.5}.
std::vector<double> default_alpha_grid();
/// {1, 2, 4, ..., 512}.
std::vector<std::size_t> default_k_grid();

struct SweepCell {
    double alpha = 0.0;
    std::size_t k = 1;
    double recall_at_1 = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> grid;  // alpha-major, in grid order
    SweepCell best;
    double raw_recall_at_1 = 0.0;
    std::uint64_t split_seed = 0;
    std::size_t n_validation = 0;
    std::size_t n_reference = 0;
};

struct HoldoutSplit {
    std::vector<std::size_t> holdout;    // sorted
    std::vector<std::size_t> remaining;  // sorted
};

/// Seeded draw of `holdout_size` rows out of a pool of `pool_rows`.
/// Throws InsufficientData when the pool holds fewer than 2 * holdout_size rows.
HoldoutSplit holdout_split(std::size_t pool_rows, std::size_t holdout_size, std::uint64_t seed);

struct SweepInputs {
    const EmbeddingMatrix* queries = nullptr;
    const EmbeddingMatrix* candidates = nullptr;
    const EmbeddingMatrix* ref_queries = nullptr;
    const GroundTruth* truth = nullptr;
    std::vector<double> grid_alpha = default_alpha_grid();
    std::vector<std::size_t> grid_k = default_k_grid();
    std::uint64_t split_seed = 42;
    /// Ground truth of the reference pool against the candidates. When set, a
    /// seeded held-out split the size of `queries` is drawn from the pool as
    /// the validation set and removed from the references; otherwise
    /// `queries`/`truth` are the validation set and the whole pool is used.
    const GroundTruth* reference_truth = nullptr;
};

/// R@1 of nnn for every (alpha, k) cell, biases from an exact index. The best
/// cell maximizes R@1, ties to smaller alpha, then smaller k.
SweepResult sweep_nnn(const SweepInputs& in);

// ---- Reference-set ablation -----------------------------------------------

struct AblationPoint {
    double fraction = 1.0;
    std::size_t n_reference = 0;
    std::map<std::size_t, double> r_at;
    std::vector<std::string> warnings;
};

struct AblationInputs {
    const EmbeddingMatrix* queries = nullptr;
    const EmbeddingMatrix* candidates = nullptr;
    const EmbeddingMatrix* ref_queries = nullptr;
    /// Passed through unablated, for methods that need it.
    const EmbeddingMatrix* ref_candidates = nullptr;
    const GroundTruth* truth = nullptr;
    std::vector<double> fractions = {0.1, 0.2, 0.5, 1.0};
    std::vector<std::size_t> ks = {1, 5, 10};
    std::uint64_t seed = 42;
};

/// Rows of the reference pool kept at `fraction`: the first round(fraction * n)
/// entries of one seeded permutation, returned sorted. Subsets are nested
/// across fractions for a fixed seed.
std::vector<std::size_t> ablation_subset(std::size_t pool_rows, double fraction, std::uint64_t seed);

std::vector<AblationPoint> ablate_reference(const AblationInputs& in, const NormalizationSpec& spec);

// ---- Attribute bias -------------------------------------------------------

struct AttributeBiasReport {
    std::vector<double> per_query;
    std::map<std::string, double> per_group;
    double mean_bias = 0.0;
};

/// Per query, (#A - #B) / n over its top n. Groups are the queries' groups
/// (a single "all" group without `query_groups`).
AttributeBiasReport attribute_bias(const RankingTable& table, const AttributeLabels& labels,
                                   std::size_t n, const QueryGroups* query_groups = nullptr);

/// Mean over queries of the share of top-n candidates whose group equals the
/// query's group.
double attribute_precision(const RankingTable& table, const AttributeLabels& labels,
                           const QueryGroups& query_groups, std::size_t n);

}  // namespace nnn
