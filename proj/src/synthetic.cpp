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

#include "nnn/synthetic.hpp"

#include <cmath>
#include <vector>

#include "nnn/error.hpp"
#include "nnn/normalization.hpp"
#include "nnn/rng.hpp"

namespace nnn {

namespace {

void normalize_in_place(std::span<double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
}

std::vector<double> gaussian_unit(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    normalize_in_place(v);
    return v;
}

/// Unit rows stored as floats, renormalized after rounding so the matrix
/// passes the normalized-row check.
void push_unit_row(std::vector<float>& out, std::span<const double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double x : v) out.push_back(static_cast<float>(x / norm));
}

struct QueryMaker {
    Rng& rng;
    std::size_t dim;
    double noise;
    double shift;
    const std::vector<double>& direction;

    void make(std::span<const float> target, std::vector<float>& out) {
        std::vector<double> q(dim);
        const double per_coord = noise / std::sqrt(static_cast<double>(dim));
        for (std::size_t d = 0; d < dim; ++d) {
            q[d] = static_cast<double>(target[d]) + per_coord * rng.normal() + shift * direction[d];
        }
        push_unit_row(out, q);
    }
};

}  // namespace

RetrievalProblem make_synthetic_hub(const SyntheticHubConfig& config) {
    NNN_CHECK(config.dim >= 2 && config.n_regular >= 1 && config.n_reference >= 1,
              ErrorCode::kInvalidArgument, "synthetic hub needs dim >= 2 and non-empty sets");
    Rng rng(config.seed);
    const std::size_t dim = config.dim;
    const auto direction = gaussian_unit(rng, dim);

    std::vector<float> regular;
    for (std::size_t i = 0; i < config.n_regular; ++i) push_unit_row(regular, gaussian_unit(rng, dim));
    const EmbeddingMatrix regular_m(config.n_regular, dim, regular, true);

    QueryMaker maker{rng, dim, config.noise, config.shift, direction};
    auto make_queries = [&](std::size_t n, GroundTruth& truth) {
        std::vector<float> data;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t target = rng.uniform_index(config.n_regular);
            maker.make(regular_m.row(target), data);
            truth.correct[i] = {target};
        }
        return EmbeddingMatrix(n, dim, std::move(data), true);
    };

    RetrievalProblem p;
    p.ref_queries = make_queries(config.n_reference, p.ref_truth);
    p.test_queries = make_queries(config.n_test, p.test_truth);

    const auto mean = mean_row(p.ref_queries);
    std::vector<float> cands = regular;
    push_unit_row(cands, mean);
    p.candidates = EmbeddingMatrix(config.n_regular + 1, dim, std::move(cands), true);
    return p;
}

RetrievalProblem make_clustered(const ClusteredConfig& config) {
    NNN_CHECK(config.dim >= 2 && config.n_topics >= 1 && config.n_candidates >= 1,
              ErrorCode::kInvalidArgument, "clustered problem needs dim >= 2 and non-empty sets");
    Rng rng(config.seed);
    const std::size_t dim = config.dim;
    const auto direction = gaussian_unit(rng, dim);

    std::vector<std::vector<double>> topics;
    for (std::size_t t = 0; t < config.n_topics; ++t) topics.push_back(gaussian_unit(rng, dim));

    std::vector<float> cands;
    cands.reserve(config.n_candidates * dim);
    std::vector<double> v(dim);
    const double per_coord = config.spread / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < config.n_candidates; ++i) {
        const auto& topic = topics[rng.uniform_index(config.n_topics)];
        for (std::size_t d = 0; d < dim; ++d) v[d] = topic[d] + per_coord * rng.normal();
        push_unit_row(cands, v);
    }
    RetrievalProblem p;
    p.candidates = EmbeddingMatrix(config.n_candidates, dim, std::move(cands), true);

    QueryMaker maker{rng, dim, config.noise, config.shift, direction};
    auto make_queries = [&](std::size_t n, GroundTruth& truth) {
        std::vector<float> data;
        data.reserve(n * dim);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t target = rng.uniform_index(config.n_candidates);
            maker.make(p.candidates.row(target), data);
            truth.correct[i] = {target};
        }
        return EmbeddingMatrix(n, dim, std::move(data), true);
    };
    p.ref_queries = make_queries(config.n_reference, p.ref_truth);
    p.test_queries = make_queries(config.n_test, p.test_truth);
    return p;
}

}  // namespace nnn
