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

// Score normalizers for retrieval.
//
// Nearest neighbor normalization gives each candidate r a bias
//
//   b(r) = alpha * mean of s(q, r) over the k reference queries q scoring
//          highest against r,
//
// and ranks by s(q, r) - b(r). Because b depends only on r it can be cached,
// or appended to r as an extra coordinate (with -1 appended to q) so that any
// inner-product index ranks by the debiased score directly.
//
// The baselines are distribution normalization (mean subtraction), DualIS
// (a product of two softmax-style ratios over reference banks), its gated
// variant DualDIS, and QBNorm (DualIS with beta1 = 0).

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnn/bias.hpp"
#include "nnn/matrix.hpp"
#include "nnn/ranking.hpp"
#include "nnn/vector_index.hpp"

namespace nnn {

enum class Method { kNone, kNnn, kDn, kQbnorm, kDualis, kDualdis };

std::string_view method_name(Method m);
/// Accepts the canonical names: none, nnn, dn, qbnorm, dualis, dualdis.
Method parse_method(std::string_view name);

/// A normalization method and exactly the parameters it needs.
struct NormalizationSpec {
    Method method = Method::kNone;
    std::optional<double> alpha;
    std::optional<std::size_t> k;
    std::optional<double> beta1;
    std::optional<double> beta2;
    std::optional<std::size_t> activation_threshold;

    static NormalizationSpec none();
    static NormalizationSpec nnn(double alpha, std::size_t k);
    static NormalizationSpec dn();
    static NormalizationSpec qbnorm(double beta2);
    static NormalizationSpec dualis(double beta1, double beta2);
    static NormalizationSpec dualdis(double beta1, double beta2, std::size_t activation_threshold = 1);

    /// Throws InvalidArgument when a parameter is missing, superfluous, or out
    /// of range (alpha and betas must be >= 0, k and threshold >= 1, and
    /// qbnorm carries no beta1).
    void validate() const;

    friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

/// How to build the index used for a search step.
struct IndexParams {
    bool exact = true;
    std::size_t ncentroids = 0;  // 0 selects default_ncentroids(rows)
    std::size_t kmeans_iters = kDefaultKmeansIters;
    std::uint64_t seed = kDefaultSeed;
    std::size_t nprobe = kDefaultNprobe;

    VectorIndex build(const EmbeddingMatrix& base) const;
};

/// Bias of every candidate against its nearest reference queries found
/// through `index_over_ref`. k is clamped to the reference count and the
/// clamped value is what the result records.
BiasVector compute_bias(const EmbeddingMatrix& candidates, const EmbeddingMatrix& ref_queries,
                        double alpha, std::size_t k, const VectorIndex& index_over_ref,
                        std::size_t nprobe = kDefaultNprobe);

/// compute_bias over an exact index.
BiasVector compute_bias_exact(const EmbeddingMatrix& candidates,
                              const EmbeddingMatrix& ref_queries, double alpha, std::size_t k);

/// out[i] = scores[i] - bias.values[i].
std::vector<double> debias_scores(std::span<const double> scores, const BiasVector& bias);

/// Appends each candidate's bias as a trailing coordinate.
EmbeddingMatrix augment_candidates(const EmbeddingMatrix& candidates, const BiasVector& bias);
/// Appends -1, so augment_query(q) . augment_candidates(r) = q.r - b(r).
std::vector<float> augment_query(std::span<const float> query);
EmbeddingMatrix augment_queries(const EmbeddingMatrix& queries);

struct DnTransformed {
    EmbeddingMatrix queries;
    EmbeddingMatrix candidates;
};

/// Subtracts the mean reference query from every query and the mean
/// reference candidate from every candidate.
DnTransformed dn_transform(const EmbeddingMatrix& queries, const EmbeddingMatrix& candidates,
                           const EmbeddingMatrix& ref_queries,
                           const EmbeddingMatrix& ref_candidates);

/// Mean row, accumulated in 64 bits in row order.
std::vector<double> mean_row(const EmbeddingMatrix& m);

/// Per-candidate log denominators for DualIS-style scores:
/// log sum_ref exp(beta * s(ref, r_i)), computed with max subtraction.
std::vector<double> log_partition(const EmbeddingMatrix& candidates, const EmbeddingMatrix& refs,
                                  double beta);

/// DualIS score of one query against every candidate:
///   s^(q, r) = exp(b1 s(q,r)) / sum_{r^} exp(b1 s(r^, r))
///            * exp(b2 s(q,r)) / sum_{q^} exp(b2 s(q^, r)).
std::vector<double> dualis_scores(std::span<const float> query,
                                  const EmbeddingMatrix& candidates,
                                  const EmbeddingMatrix& ref_queries,
                                  const EmbeddingMatrix& ref_candidates, double beta1,
                                  double beta2);

/// Natural log of dualis_scores; ranks identically and never underflows.
std::vector<double> dualis_log_scores(std::span<const float> query,
                                      const EmbeddingMatrix& candidates,
                                      const EmbeddingMatrix& ref_queries,
                                      const EmbeddingMatrix& ref_candidates, double beta1,
                                      double beta2);

/// The query-bank factor alone: exp(b2 s(q,r)) / sum_{q^} exp(b2 s(q^, r)).
std::vector<double> qbnorm_scores(std::span<const float> query, const EmbeddingMatrix& candidates,
                                  const EmbeddingMatrix& ref_queries, double beta2);

using ActivationSet = std::set<std::uint32_t>;

/// Candidates that are the top-1 hit (through `candidate_index`) of at least
/// `threshold` reference queries.
ActivationSet build_activation_set(const EmbeddingMatrix& candidates,
                                   const EmbeddingMatrix& ref_queries, std::size_t threshold,
                                   const VectorIndex& candidate_index);

/// DualIS scores when the query's raw top-1 candidate is in `activation`,
/// raw inner products otherwise.
std::vector<double> dualdis_scores(std::span<const float> query,
                                   const EmbeddingMatrix& candidates,
                                   const EmbeddingMatrix& ref_queries,
                                   const EmbeddingMatrix& ref_candidates, double beta1,
                                   double beta2, const ActivationSet& activation);

struct ApplyInputs {
    const EmbeddingMatrix* queries = nullptr;
    const EmbeddingMatrix* candidates = nullptr;
    const EmbeddingMatrix* ref_queries = nullptr;
    const EmbeddingMatrix* ref_candidates = nullptr;
    /// Cached bias for nnn; computed from ref_queries when absent.
    const BiasVector* bias = nullptr;
    std::size_t depth = 10;
    /// Index used for raw retrieval (none, dn, augmented nnn).
    IndexParams retrieval_index;
    /// Index over the reference queries for nnn bias estimation.
    IndexParams bias_index;
    /// nnn: search augmented embeddings instead of subtracting scores.
    bool augmented = false;
};

struct NormalizedRanking {
    RankingTable table;
    std::vector<std::string> warnings;
    /// The bias used by nnn.
    std::optional<BiasVector> bias;
};

/// Ranks every query under `spec`. Scores in the table are the method's own
/// ranking scores; for qbnorm, dualis, and dualdis-gated queries they are
/// natural logs of the normalized scores.
NormalizedRanking apply(const NormalizationSpec& spec, const ApplyInputs& in);

}  // namespace nnn
