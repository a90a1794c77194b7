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

#include "nnn/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nnn/embed_io.hpp"
#include "nnn/error.hpp"
#include "nnn/kernels.hpp"

namespace nnn {

std::string_view method_name(Method m) {
    switch (m) {
        case Method::kNone: return "none";
        case Method::kNnn: return "nnn";
        case Method::kDn: return "dn";
        case Method::kQbnorm: return "qbnorm";
        case Method::kDualis: return "dualis";
        case Method::kDualdis: return "dualdis";
    }
    return "none";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::kNone, Method::kNnn, Method::kDn, Method::kQbnorm, Method::kDualis,
                     Method::kDualdis}) {
        if (method_name(m) == name) return m;
    }
    NNN_THROW(ErrorCode::kInvalidArgument, "unknown method \"" + std::string(name) + "\"");
}

NormalizationSpec NormalizationSpec::none() { return {}; }

NormalizationSpec NormalizationSpec::nnn(double alpha, std::size_t k) {
    NormalizationSpec s;
    s.method = Method::kNnn;
    s.alpha = alpha;
    s.k = k;
    return s;
}

NormalizationSpec NormalizationSpec::dn() {
    NormalizationSpec s;
    s.method = Method::kDn;
    return s;
}

NormalizationSpec NormalizationSpec::qbnorm(double beta2) {
    NormalizationSpec s;
    s.method = Method::kQbnorm;
    s.beta2 = beta2;
    return s;
}

NormalizationSpec NormalizationSpec::dualis(double beta1, double beta2) {
    NormalizationSpec s;
    s.method = Method::kDualis;
    s.beta1 = beta1;
    s.beta2 = beta2;
    return s;
}

NormalizationSpec NormalizationSpec::dualdis(double beta1, double beta2,
                                             std::size_t activation_threshold) {
    NormalizationSpec s = dualis(beta1, beta2);
    s.method = Method::kDualdis;
    s.activation_threshold = activation_threshold;
    return s;
}

void NormalizationSpec::validate() const {
    const bool wants_nnn = method == Method::kNnn;
    const bool wants_beta1 = method == Method::kDualis || method == Method::kDualdis;
    const bool wants_beta2 = wants_beta1 || method == Method::kQbnorm;
    const bool wants_threshold = method == Method::kDualdis;
    const std::string m(method_name(method));

    auto require = [&](bool present, bool wanted, const char* field) {
        NNN_CHECK(present == wanted, ErrorCode::kInvalidArgument,
                  std::string(wanted ? "method " + m + " requires " : "method " + m + " does not take ") +
                      field);
    };
    require(alpha.has_value(), wants_nnn, "alpha");
    require(k.has_value(), wants_nnn, "k");
    require(beta1.has_value(), wants_beta1, "beta1");
    require(beta2.has_value(), wants_beta2, "beta2");
    require(activation_threshold.has_value(), wants_threshold, "activation_threshold");

    if (alpha) NNN_CHECK(*alpha >= 0.0 && std::isfinite(*alpha), ErrorCode::kInvalidArgument, "alpha must be >= 0");
    if (k) NNN_CHECK(*k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
    if (beta1) NNN_CHECK(*beta1 >= 0.0 && std::isfinite(*beta1), ErrorCode::kInvalidArgument, "beta1 must be >= 0");
    if (beta2) NNN_CHECK(*beta2 >= 0.0 && std::isfinite(*beta2), ErrorCode::kInvalidArgument, "beta2 must be >= 0");
    if (activation_threshold) {
        NNN_CHECK(*activation_threshold >= 1, ErrorCode::kInvalidArgument,
                  "activation_threshold must be >= 1");
    }
}

VectorIndex IndexParams::build(const EmbeddingMatrix& base) const {
    if (exact) return VectorIndex::build_exact(base);
    const std::size_t c = ncentroids == 0 ? default_ncentroids(base.rows()) : ncentroids;
    return VectorIndex::build_ivf(base, c, kmeans_iters, seed);
}

namespace {

void check_same_dim(const EmbeddingMatrix& a, const EmbeddingMatrix& b, const char* what) {
    NNN_CHECK(a.dim() == b.dim(), ErrorCode::kDimMismatch,
              std::string(what) + ": " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

void check_nonempty(const EmbeddingMatrix& refs, const char* what) {
    NNN_CHECK(refs.rows() >= 1, ErrorCode::kEmptyReferenceSet, what);
}

void check_query_dim(std::span<const float> query, const EmbeddingMatrix& candidates) {
    NNN_CHECK(query.size() == candidates.dim(), ErrorCode::kDimMismatch,
              "query dim " + std::to_string(query.size()) + " vs candidate dim " +
                  std::to_string(candidates.dim()));
}

std::vector<double> raw_scores(std::span<const float> query, const EmbeddingMatrix& candidates) {
    std::vector<double> out(candidates.rows());
    for (std::size_t j = 0; j < candidates.rows(); ++j) {
        out[j] = kernels::dot(query, candidates.row(j));
    }
    return out;
}

void check_beta(double beta, const char* name) {
    NNN_CHECK(beta >= 0.0 && std::isfinite(beta), ErrorCode::kInvalidArgument,
              std::string(name) + " must be >= 0");
}

/// log ratio per candidate: beta * s - log_partition.
void add_log_ratio(std::span<const double> raw, double beta, std::span<const double> partition,
                   std::span<double> out) {
    for (std::size_t j = 0; j < raw.size(); ++j) out[j] += beta * raw[j] - partition[j];
}

}  // namespace

BiasVector compute_bias(const EmbeddingMatrix& candidates, const EmbeddingMatrix& ref_queries,
                        double alpha, std::size_t k, const VectorIndex& index_over_ref,
                        std::size_t nprobe) {
    check_nonempty(ref_queries, "bias needs at least one reference query");
    check_same_dim(candidates, ref_queries, "candidates vs reference queries");
    NNN_CHECK(index_over_ref.rows() == ref_queries.rows() && index_over_ref.dim() == ref_queries.dim(),
              ErrorCode::kInvalidArgument, "index was not built over the reference queries");
    NNN_CHECK(alpha >= 0.0 && std::isfinite(alpha), ErrorCode::kInvalidArgument, "alpha must be >= 0");
    NNN_CHECK(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");

    const std::size_t k_used = std::min(k, ref_queries.rows());
    const RankingTable nearest = index_over_ref.batch_search(candidates, k_used, nprobe);

    BiasVector bias;
    bias.alpha = alpha;
    bias.k = static_cast<std::uint32_t>(k_used);
    bias.ref_fingerprint = fingerprint(ref_queries);
    bias.values.resize(candidates.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(candidates.rows()); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& hits = nearest[i];
        double sum = 0.0;
        for (const SearchHit& h : hits) sum += h.score;
        const double mean = hits.empty() ? 0.0 : sum / static_cast<double>(hits.size());
        bias.values[i] = static_cast<float>(alpha * mean);
    }
    return bias;
}

BiasVector compute_bias_exact(const EmbeddingMatrix& candidates,
                              const EmbeddingMatrix& ref_queries, double alpha, std::size_t k) {
    return compute_bias(candidates, ref_queries, alpha, k, VectorIndex::build_exact(ref_queries));
}

std::vector<double> debias_scores(std::span<const double> scores, const BiasVector& bias) {
    NNN_CHECK(scores.size() == bias.size(), ErrorCode::kLengthMismatch,
              std::to_string(scores.size()) + " scores vs " + std::to_string(bias.size()) + " biases");
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = scores[i] - static_cast<double>(bias.values[i]);
    }
    return out;
}

EmbeddingMatrix augment_candidates(const EmbeddingMatrix& candidates, const BiasVector& bias) {
    NNN_CHECK(candidates.rows() == bias.size(), ErrorCode::kLengthMismatch,
              std::to_string(candidates.rows()) + " candidates vs " + std::to_string(bias.size()) +
                  " biases");
    const std::size_t dim = candidates.dim();
    std::vector<float> data;
    data.reserve(candidates.rows() * (dim + 1));
    for (std::size_t i = 0; i < candidates.rows(); ++i) {
        const auto r = candidates.row(i);
        data.insert(data.end(), r.begin(), r.end());
        data.push_back(bias.values[i]);
    }
    return EmbeddingMatrix(candidates.rows(), dim + 1, std::move(data), false);
}

std::vector<float> augment_query(std::span<const float> query) {
    std::vector<float> out(query.begin(), query.end());
    out.push_back(-1.0F);
    return out;
}

EmbeddingMatrix augment_queries(const EmbeddingMatrix& queries) {
    std::vector<float> data;
    data.reserve(queries.rows() * (queries.dim() + 1));
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        const auto q = augment_query(queries.row(i));
        data.insert(data.end(), q.begin(), q.end());
    }
    return EmbeddingMatrix(queries.rows(), queries.dim() + 1, std::move(data), false);
}

std::vector<double> mean_row(const EmbeddingMatrix& m) {
    std::vector<double> mean(m.dim(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        for (std::size_t d = 0; d < m.dim(); ++d) mean[d] += r[d];
    }
    if (m.rows() > 0) {
        for (double& v : mean) v /= static_cast<double>(m.rows());
    }
    return mean;
}

namespace {

EmbeddingMatrix subtract_row(const EmbeddingMatrix& m, std::span<const double> shift) {
    std::vector<float> data(m.data().begin(), m.data().end());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t d = 0; d < m.dim(); ++d) {
            float& x = data[i * m.dim() + d];
            x = static_cast<float>(static_cast<double>(x) - shift[d]);
        }
    }
    return EmbeddingMatrix(m.rows(), m.dim(), std::move(data), false);
}

}  // namespace

DnTransformed dn_transform(const EmbeddingMatrix& queries, const EmbeddingMatrix& candidates,
                           const EmbeddingMatrix& ref_queries,
                           const EmbeddingMatrix& ref_candidates) {
    check_nonempty(ref_queries, "dn needs reference queries");
    check_nonempty(ref_candidates, "dn needs reference candidates");
    check_same_dim(queries, ref_queries, "queries vs reference queries");
    check_same_dim(candidates, ref_candidates, "candidates vs reference candidates");
    return {subtract_row(queries, mean_row(ref_queries)),
            subtract_row(candidates, mean_row(ref_candidates))};
}

std::vector<double> log_partition(const EmbeddingMatrix& candidates, const EmbeddingMatrix& refs,
                                  double beta) {
    check_nonempty(refs, "partition needs references");
    check_same_dim(candidates, refs, "candidates vs references");
    return kernels::logsumexp_rows(candidates, refs, beta);
}

std::vector<double> dualis_log_scores(std::span<const float> query,
                                      const EmbeddingMatrix& candidates,
                                      const EmbeddingMatrix& ref_queries,
                                      const EmbeddingMatrix& ref_candidates, double beta1,
                                      double beta2) {
    check_nonempty(ref_queries, "dualis needs reference queries");
    check_nonempty(ref_candidates, "dualis needs reference candidates");
    check_query_dim(query, candidates);
    check_beta(beta1, "beta1");
    check_beta(beta2, "beta2");
    const auto raw = raw_scores(query, candidates);
    std::vector<double> out(raw.size(), 0.0);
    add_log_ratio(raw, beta1, log_partition(candidates, ref_candidates, beta1), out);
    add_log_ratio(raw, beta2, log_partition(candidates, ref_queries, beta2), out);
    return out;
}

std::vector<double> dualis_scores(std::span<const float> query,
                                  const EmbeddingMatrix& candidates,
                                  const EmbeddingMatrix& ref_queries,
                                  const EmbeddingMatrix& ref_candidates, double beta1,
                                  double beta2) {
    auto out = dualis_log_scores(query, candidates, ref_queries, ref_candidates, beta1, beta2);
    for (double& v : out) v = std::exp(v);
    return out;
}

std::vector<double> qbnorm_scores(std::span<const float> query, const EmbeddingMatrix& candidates,
                                  const EmbeddingMatrix& ref_queries, double beta2) {
    check_nonempty(ref_queries, "qbnorm needs reference queries");
    check_query_dim(query, candidates);
    check_beta(beta2, "beta2");
    const auto raw = raw_scores(query, candidates);
    std::vector<double> out(raw.size(), 0.0);
    add_log_ratio(raw, beta2, log_partition(candidates, ref_queries, beta2), out);
    for (double& v : out) v = std::exp(v);
    return out;
}

ActivationSet build_activation_set(const EmbeddingMatrix& candidates,
                                   const EmbeddingMatrix& ref_queries, std::size_t threshold,
                                   const VectorIndex& candidate_index) {
    NNN_CHECK(threshold >= 1, ErrorCode::kInvalidArgument, "threshold must be >= 1");
    check_nonempty(ref_queries, "activation set needs reference queries");
    check_same_dim(candidates, ref_queries, "candidates vs reference queries");
    NNN_CHECK(candidate_index.rows() == candidates.rows(), ErrorCode::kInvalidArgument,
              "index was not built over the candidates");
    ActivationSet set;
    if (candidates.rows() == 0) return set;
    const RankingTable top1 = candidate_index.batch_search(ref_queries, 1);
    std::vector<std::size_t> counts(candidates.rows(), 0);
    for (const auto& hits : top1.queries) {
        if (!hits.empty()) ++counts[hits.front().candidate];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] >= threshold) set.insert(static_cast<std::uint32_t>(c));
    }
    return set;
}

std::vector<double> dualdis_scores(std::span<const float> query,
                                   const EmbeddingMatrix& candidates,
                                   const EmbeddingMatrix& ref_queries,
                                   const EmbeddingMatrix& ref_candidates, double beta1,
                                   double beta2, const ActivationSet& activation) {
    check_query_dim(query, candidates);
    auto raw = raw_scores(query, candidates);
    const auto top = rank_scores(raw, 1);
    if (!top.empty() && activation.contains(top.front().candidate)) {
        return dualis_scores(query, candidates, ref_queries, ref_candidates, beta1, beta2);
    }
    return raw;
}

namespace {

const EmbeddingMatrix& require_ref(const EmbeddingMatrix* m, Method method, const char* what) {
    NNN_CHECK(m != nullptr, ErrorCode::kMissingReference,
              std::string(method_name(method)) + " needs " + what);
    return *m;
}

/// Ranks every query by `score_row(query_index, raw_scores) -> scores`.
template <typename ScoreFn>
RankingTable rank_exhaustive(const EmbeddingMatrix& queries, const EmbeddingMatrix& candidates,
                             std::size_t depth, ScoreFn&& score_row) {
    const kernels::PackedRows packed(candidates);
    RankingTable table;
    table.queries.resize(queries.rows());
#pragma omp parallel
    {
        std::vector<double> raw(candidates.rows());
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(queries.rows()); ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            kernels::scan_all(queries.row(i).data(), packed, raw);
            table.queries[i] = rank_scores(score_row(raw), depth);
        }
    }
    return table;
}

}  // namespace

NormalizedRanking apply(const NormalizationSpec& spec, const ApplyInputs& in) {
    spec.validate();
    NNN_CHECK(in.queries != nullptr && in.candidates != nullptr, ErrorCode::kInvalidArgument,
              "apply needs queries and candidates");
    NNN_CHECK(in.depth >= 1, ErrorCode::kInvalidArgument, "depth must be >= 1");
    const EmbeddingMatrix& queries = *in.queries;
    const EmbeddingMatrix& candidates = *in.candidates;
    check_same_dim(queries, candidates, "queries vs candidates");

    NormalizedRanking result;
    const std::size_t nprobe = in.retrieval_index.nprobe;

    switch (spec.method) {
        case Method::kNone: {
            result.table = in.retrieval_index.build(candidates).batch_search(queries, in.depth, nprobe);
            break;
        }
        case Method::kNnn: {
            BiasVector bias;
            if (in.bias != nullptr) {
                bias = *in.bias;
                NNN_CHECK(bias.size() == candidates.rows(), ErrorCode::kLengthMismatch,
                          "cached bias covers " + std::to_string(bias.size()) + " candidates, have " +
                              std::to_string(candidates.rows()));
                if (in.ref_queries != nullptr && !bias_matches_reference(bias, *in.ref_queries)) {
                    result.warnings.push_back("cached bias fingerprint does not match the reference queries");
                }
            } else {
                const auto& refs = require_ref(in.ref_queries, spec.method, "reference queries");
                check_nonempty(refs, "nnn needs at least one reference query");
                const VectorIndex ref_index = in.bias_index.build(refs);
                bias = compute_bias(candidates, refs, *spec.alpha, *spec.k, ref_index,
                                    in.bias_index.nprobe);
                if (bias.k < *spec.k) {
                    result.warnings.push_back("k clamped from " + std::to_string(*spec.k) + " to " +
                                              std::to_string(bias.k) + " reference queries");
                }
            }
            if (in.augmented) {
                const auto aug = augment_candidates(candidates, bias);
                result.table = in.retrieval_index.build(aug).batch_search(augment_queries(queries),
                                                                          in.depth, nprobe);
            } else {
                result.table = rank_exhaustive(queries, candidates, in.depth,
                                               [&](const std::vector<double>& raw) {
                                                   return debias_scores(raw, bias);
                                               });
            }
            result.bias = std::move(bias);
            break;
        }
        case Method::kDn: {
            const auto& rq = require_ref(in.ref_queries, spec.method, "reference queries");
            const auto& rc = require_ref(in.ref_candidates, spec.method, "reference candidates");
            const auto t = dn_transform(queries, candidates, rq, rc);
            result.table = in.retrieval_index.build(t.candidates).batch_search(t.queries, in.depth, nprobe);
            break;
        }
        case Method::kQbnorm: {
            const auto& rq = require_ref(in.ref_queries, spec.method, "reference queries");
            check_same_dim(candidates, rq, "candidates vs reference queries");
            const auto lq = log_partition(candidates, rq, *spec.beta2);
            const double b2 = *spec.beta2;
            result.table = rank_exhaustive(queries, candidates, in.depth,
                                           [&](const std::vector<double>& raw) {
                                               std::vector<double> out(raw.size(), 0.0);
                                               add_log_ratio(raw, b2, lq, out);
                                               return out;
                                           });
            break;
        }
        case Method::kDualis:
        case Method::kDualdis: {
            const auto& rq = require_ref(in.ref_queries, spec.method, "reference queries");
            const auto& rc = require_ref(in.ref_candidates, spec.method, "reference candidates");
            check_same_dim(candidates, rq, "candidates vs reference queries");
            check_same_dim(candidates, rc, "candidates vs reference candidates");
            const double b1 = *spec.beta1;
            const double b2 = *spec.beta2;
            const auto lr = log_partition(candidates, rc, b1);
            const auto lq = log_partition(candidates, rq, b2);
            ActivationSet activation;
            const bool gated = spec.method == Method::kDualdis;
            if (gated) {
                activation = build_activation_set(candidates, rq, *spec.activation_threshold,
                                                  VectorIndex::build_exact(candidates));
            }
            result.table = rank_exhaustive(queries, candidates, in.depth,
                                           [&](const std::vector<double>& raw) {
                                               if (gated) {
                                                   const auto top = rank_scores(raw, 1);
                                                   if (top.empty() || !activation.contains(top.front().candidate)) {
                                                       return raw;
                                                   }
                                               }
                                               std::vector<double> out(raw.size(), 0.0);
                                               add_log_ratio(raw, b1, lr, out);
                                               add_log_ratio(raw, b2, lq, out);
                                               return out;
                                           });
            break;
        }
    }
    return result;
}

}  // namespace nnn
