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

#include "nnn/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nnn/error.hpp"
#include "nnn/rng.hpp"

namespace nnn {

std::size_t default_ncentroids(std::size_t rows) {
    auto c = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(rows))));
    while (c * c < rows) ++c;
    return std::max<std::size_t>(c, 1);
}

namespace {

double squared_norm(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
    return acc;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
        acc += diff * diff;
    }
    return acc;
}

/// Sample an index with probability proportional to weights[i].
std::size_t sample_weighted(Rng& rng, std::span<const double> weights, double total) {
    const double target = rng.uniform01() * total;
    double running = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        running += weights[i];
        last_positive = i;
        if (target < running) return i;
    }
    return last_positive;
}

std::vector<std::size_t> seed_plus_plus(const EmbeddingMatrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    std::vector<char> taken(n, 0);
    chosen.push_back(rng.uniform_index(n));
    taken[chosen.back()] = 1;
    std::vector<double> d2(n);
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), points.row(chosen[0]));
    while (chosen.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : d2[i];
        std::size_t next = 0;
        if (total > 0.0) {
            for (std::size_t i = 0; i < n; ++i) weights[i] = taken[i] ? 0.0 : d2[i];
            next = sample_weighted(rng, weights, total);
        } else {
            // Remaining points coincide with chosen ones; pick any unused row.
            std::size_t skip = rng.uniform_index(n - chosen.size());
            for (next = 0; next < n; ++next) {
                if (!taken[next] && skip-- == 0) break;
            }
        }
        chosen.push_back(next);
        taken[next] = 1;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            const auto r = static_cast<std::size_t>(i);
            d2[r] = std::min(d2[r], squared_distance(points.row(r), points.row(next)));
        }
    }
    return chosen;
}

/// Nearest centroid by L2 for every point, using ||c||^2 - 2 x.c.
/// Returns per-point squared distances in `dist`.
void assign_points(const EmbeddingMatrix& points, const std::vector<float>& centroids,
                   std::size_t k, std::vector<std::uint32_t>& assign, std::vector<double>& dist) {
    const std::size_t dim = points.dim();
    const EmbeddingMatrix cmat(k, dim, centroids);
    const kernels::PackedRows packed(cmat);
    std::vector<double> cnorm(k);
    for (std::size_t c = 0; c < k; ++c) cnorm[c] = squared_norm(cmat.row(c));
#pragma omp parallel
    {
        std::vector<double> scores(k);
#pragma omp for schedule(static)
        for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(points.rows()); ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const auto row = points.row(i);
            kernels::scan_all(row.data(), packed, scores);
            std::size_t best = 0;
            double best_val = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double v = cnorm[c] - 2.0 * scores[c];
                if (v < best_val) {
                    best_val = v;
                    best = c;
                }
            }
            assign[i] = static_cast<std::uint32_t>(best);
            dist[i] = std::max(0.0, best_val + squared_norm(row));
        }
    }
}

}  // namespace

KMeansResult kmeans(const EmbeddingMatrix& points, std::size_t k, std::size_t iters,
                    std::uint64_t seed, bool spherical) {
    NNN_CHECK(k >= 1, ErrorCode::kInvalidArgument, "kmeans needs k >= 1");
    NNN_CHECK(points.rows() >= k, ErrorCode::kKTooLarge,
              "k=" + std::to_string(k) + " exceeds " + std::to_string(points.rows()) + " points");
    const std::size_t n = points.rows();
    const std::size_t dim = points.dim();

    Rng rng(seed);
    const auto seeds = seed_plus_plus(points, k, rng);
    std::vector<float> centroids;
    centroids.reserve(k * dim);
    for (std::size_t s : seeds) {
        const auto r = points.row(s);
        centroids.insert(centroids.end(), r.begin(), r.end());
    }

    std::vector<std::uint32_t> assign(n, 0);
    std::vector<double> dist(n, 0.0);
    assign_points(points, centroids, k, assign, dist);

    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    for (std::size_t it = 0; it < iters; ++it) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = points.row(i);
            double* acc = sums.data() + assign[i] * dim;
            for (std::size_t d = 0; d < dim; ++d) acc[d] += r[d];
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Steal the point farthest from its own centroid.
                const auto far = static_cast<std::size_t>(
                    std::max_element(dist.begin(), dist.end()) - dist.begin());
                const auto r = points.row(far);
                std::copy(r.begin(), r.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
                dist[far] = 0.0;
                continue;
            }
            double* mean = sums.data() + c * dim;
            double scale = 1.0 / static_cast<double>(counts[c]);
            if (spherical) {
                double norm = 0.0;
                for (std::size_t d = 0; d < dim; ++d) norm += mean[d] * mean[d];
                // A zero mean has no direction; keep it as is.
                if (norm > 0.0) scale = 1.0 / std::sqrt(norm);
            }
            for (std::size_t d = 0; d < dim; ++d) {
                centroids[c * dim + d] = static_cast<float>(mean[d] * scale);
            }
        }
        const auto previous = assign;
        assign_points(points, centroids, k, assign, dist);
        if (assign == previous) break;
    }

    KMeansResult result{EmbeddingMatrix(k, dim, std::move(centroids)), std::move(assign), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        result.sse += squared_distance(points.row(i), result.centroids.row(result.assignments[i]));
    }
    return result;
}

VectorIndex VectorIndex::build_exact(const EmbeddingMatrix& base) {
    VectorIndex index;
    index.kind_ = IndexKind::kExact;
    index.rows_ = base.rows();
    index.dim_ = base.dim();
    index.all_rows_ = kernels::PackedRows(base);
    return index;
}

VectorIndex VectorIndex::build_ivf(const EmbeddingMatrix& base, std::size_t ncentroids,
                                   std::size_t kmeans_iters, std::uint64_t seed) {
    NNN_CHECK(ncentroids >= 1, ErrorCode::kInvalidArgument, "ncentroids must be >= 1");
    // Unit-norm data gets unit-norm centroids, so probing by inner product
    // does not penalize lists that span several directions.
    auto km = kmeans(base, ncentroids, kmeans_iters, seed, base.normalized());
    VectorIndex index;
    index.kind_ = IndexKind::kIvf;
    index.rows_ = base.rows();
    index.dim_ = base.dim();
    index.lists_.assign(ncentroids, {});
    for (std::size_t i = 0; i < base.rows(); ++i) {
        index.lists_[km.assignments[i]].push_back(static_cast<std::uint32_t>(i));
    }
    index.packed_lists_.reserve(ncentroids);
    for (const auto& list : index.lists_) index.packed_lists_.emplace_back(base, list);
    index.centroids_ = std::move(km.centroids);
    index.packed_centroids_ = kernels::PackedRows(index.centroids_);
    return index;
}

void VectorIndex::check_query(std::size_t query_dim, std::size_t k, std::size_t nprobe) const {
    NNN_CHECK(query_dim == dim_, ErrorCode::kDimMismatch,
              "query dim " + std::to_string(query_dim) + " vs index dim " + std::to_string(dim_));
    NNN_CHECK(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
    NNN_CHECK(nprobe >= 1, ErrorCode::kInvalidArgument, "nprobe must be >= 1");
}

void VectorIndex::search_into(const float* query, std::size_t nprobe, kernels::TopK& top) const {
    if (kind_ == IndexKind::kExact) {
        kernels::scan_into(query, all_rows_, top);
        return;
    }
    const std::size_t probes = std::min(nprobe, lists_.size());
    kernels::TopK best_lists(probes);
    kernels::scan_into(query, packed_centroids_, best_lists);
    for (const SearchHit& list : best_lists.take_sorted()) {
        kernels::scan_into(query, packed_lists_[list.candidate], top);
    }
}

std::vector<SearchHit> VectorIndex::search(std::span<const float> query, std::size_t k,
                                           std::size_t nprobe) const {
    check_query(query.size(), k, nprobe);
    kernels::TopK top(std::min(k, rows_));
    search_into(query.data(), nprobe, top);
    return top.take_sorted();
}

RankingTable VectorIndex::batch_search(const EmbeddingMatrix& queries, std::size_t k,
                                       std::size_t nprobe) const {
    check_query(queries.dim(), k, nprobe);
    RankingTable table;
    table.queries.resize(queries.rows());
#pragma omp parallel
    {
        kernels::TopK top(std::min(k, rows_));
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(queries.rows()); ++i) {
            const auto q = static_cast<std::size_t>(i);
            search_into(queries.row(q).data(), nprobe, top);
            table.queries[q] = top.take_sorted();
        }
    }
    return table;
}

}  // namespace nnn
