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

// Seeded synthetic retrieval problems with planted ground truth.

#pragma once

#include <cstddef>
#include <cstdint>

#include "nnn/embed_io.hpp"
#include "nnn/matrix.hpp"

namespace nnn {

struct RetrievalProblem {
    EmbeddingMatrix candidates;
    EmbeddingMatrix ref_queries;
    EmbeddingMatrix test_queries;
    GroundTruth ref_truth;
    GroundTruth test_truth;
};

/// Regular candidates are isotropic Gaussian unit vectors. Every query is
/// normalize(target + noise * g / sqrt(dim) + shift * m) for a uniformly drawn
/// regular target, a fresh standard Gaussian g, and one shared unit direction
/// m, so queries share a common component. The final candidate is the hub: the normalized
/// mean of the reference queries. No query has the hub as its answer.
struct SyntheticHubConfig {
    std::size_t dim = 32;
    std::size_t n_regular = 99;
    std::size_t n_reference = 500;
    std::size_t n_test = 500;
    double noise = 1.0;
    double shift = 1.0;
    std::uint64_t seed = 42;
};

RetrievalProblem make_synthetic_hub(const SyntheticHubConfig& config);

/// Topic-structured data: candidates are normalize(topic + spread * g / sqrt(dim));
/// queries are normalize(target + noise * g / sqrt(dim) + shift * m) for a random target
/// candidate. Resembles real embedding sets, where inverted lists are
/// meaningful.
struct ClusteredConfig {
    std::size_t dim = 64;
    std::size_t n_topics = 256;
    std::size_t n_candidates = 50'000;
    std::size_t n_reference = 100'000;
    std::size_t n_test = 5'000;
    double spread = 0.3;
    double noise = 0.35;
    double shift = 0.8;
    std::uint64_t seed = 42;
};

RetrievalProblem make_clustered(const ClusteredConfig& config);

}  // namespace nnn
