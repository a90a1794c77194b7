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
#include <span>
#include <vector>

#include "nnn/kernels.hpp"
#include "nnn/matrix.hpp"
#include "nnn/ranking.hpp"

namespace nnn {

inline constexpr std::size_t kDefaultNprobe = 8;
inline constexpr std::size_t kDefaultKmeansIters = 20;
inline constexpr std::uint64_t kDefaultSeed = 42;

/// ceil(sqrt(rows)), at least 1.
std::size_t default_ncentroids(std::size_t rows);

struct KMeansResult {
    EmbeddingMatrix centroids;
    std::vector<std::uint32_t> assignments;
    /// Within-cluster sum of squared L2 distances under the final assignment.
    double sse = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding drawn from `seed`.
///
/// Points are assigned to the nearest centroid by L2 distance (ties to the
/// lower centroid id). A cluster that empties out is re-seeded with the point
/// lying farthest from its own centroid. Iteration stops early once the
/// assignment is stable. With `iters == 0` the centroids are the seeded points.
/// `spherical` rescales every updated centroid to unit length (the usual
/// choice for inner-product search over unit vectors).
KMeansResult kmeans(const EmbeddingMatrix& points, std::size_t k, std::size_t iters,
                    std::uint64_t seed, bool spherical = false);

enum class IndexKind { kExact, kIvf };

/// Top-k maximum-inner-product search, either exhaustive or over an inverted
/// file. Immutable after construction; concurrent searches are safe.
class VectorIndex {
public:
    static VectorIndex build_exact(const EmbeddingMatrix& base);
    /// Over a normalized base the coarse quantizer is spherical k-means.
    static VectorIndex build_ivf(const EmbeddingMatrix& base, std::size_t ncentroids,
                                 std::size_t kmeans_iters = kDefaultKmeansIters,
                                 std::uint64_t seed = kDefaultSeed);

    IndexKind kind() const noexcept { return kind_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    std::size_t ncentroids() const noexcept { return lists_.size(); }
    const EmbeddingMatrix& centroids() const noexcept { return centroids_; }
    /// Base-row ids per inverted list (ivf only).
    const std::vector<std::vector<std::uint32_t>>& lists() const noexcept { return lists_; }

    /// Best `k` rows by inner product (clamped to the number of rows). For an
    /// ivf index only the `nprobe` lists whose centroids score highest against
    /// the query are scanned; `nprobe` is ignored by the exact index.
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k,
                                  std::size_t nprobe = kDefaultNprobe) const;

    /// Row i is `search(queries.row(i), k, nprobe)`; runs queries in parallel.
    RankingTable batch_search(const EmbeddingMatrix& queries, std::size_t k,
                              std::size_t nprobe = kDefaultNprobe) const;

private:
    VectorIndex() = default;

    void check_query(std::size_t query_dim, std::size_t k, std::size_t nprobe) const;
    void search_into(const float* query, std::size_t nprobe, kernels::TopK& top) const;

    IndexKind kind_ = IndexKind::kExact;
    std::size_t rows_ = 0;
    std::size_t dim_ = 1;
    kernels::PackedRows all_rows_;
    EmbeddingMatrix centroids_;
    kernels::PackedRows packed_centroids_;
    std::vector<std::vector<std::uint32_t>> lists_;
    std::vector<kernels::PackedRows> packed_lists_;
};

}  // namespace nnn
