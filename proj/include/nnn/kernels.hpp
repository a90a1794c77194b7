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

// Scoring kernels shared by the indexes and the normalizers.
//
// Every score is an inner product of 32-bit inputs accumulated in 64 bits in
// ascending dimension order. A float*float product is exact in double, so the
// packed kernels below (which vectorize across rows, never across dimensions)
// reproduce `dot()` bit for bit, whatever the schedule or instruction set.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "nnn/matrix.hpp"

namespace nnn {

struct SearchHit {
    std::uint32_t candidate = 0;
    double score = 0.0;

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Ranking order: higher score first, ties by ascending candidate index.
inline bool ranks_before(const SearchHit& a, const SearchHit& b) noexcept {
    return a.score > b.score || (a.score == b.score && a.candidate < b.candidate);
}

namespace kernels {

inline double dot(const float* a, const float* b, std::size_t dim) noexcept {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        acc += static_cast<double>(a[d]) * static_cast<double>(b[d]);
    }
    return acc;
}

inline double dot(std::span<const float> a, std::span<const float> b) noexcept {
    return dot(a.data(), b.data(), a.size());
}

/// Bounded selection of the best `k` hits under `ranks_before`.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

    void push(std::uint32_t candidate, double score);
    void reset() { heap_.clear(); }
    std::size_t size() const noexcept { return heap_.size(); }
    /// Scores strictly below this can never enter; -inf until k hits are held.
    double floor() const noexcept {
        return heap_.size() < k_ || k_ == 0 ? -std::numeric_limits<double>::infinity()
                                             : heap_.front().score;
    }

    /// Best-first. Leaves the accumulator empty.
    std::vector<SearchHit> take_sorted();

private:
    std::size_t k_;
    // Max-heap under ranks_before, so front() is the worst kept hit.
    std::vector<SearchHit> heap_;
};

/// Rows packed into blocks of kWidth, each block stored dimension-major, so
/// one pass over the dimensions scores kWidth rows at once. Short blocks are
/// zero-padded; `ids` maps packed slots back to caller row indices.
class PackedRows {
public:
    static constexpr std::size_t kWidth = 16;

    PackedRows() = default;
    /// Packs all rows of `m`.
    explicit PackedRows(const EmbeddingMatrix& m);
    /// Packs the listed rows of `m`, keeping `ids` as their labels.
    PackedRows(const EmbeddingMatrix& m, std::vector<std::uint32_t> ids);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t blocks() const noexcept { return (ids_.size() + kWidth - 1) / kWidth; }
    const float* block(std::size_t b) const noexcept { return data_.data() + b * dim_ * kWidth; }
    std::span<const std::uint32_t> ids() const noexcept { return ids_; }

private:
    std::size_t dim_ = 0;
    std::vector<std::uint32_t> ids_;
    std::vector<float> data_;
};

/// Scores `query` against one packed block: out[j] = dot(query, row j).
void score_block(const float* query, const float* block, std::size_t dim, double* out) noexcept;

/// Pushes every row of `rows` into `top`.
void scan_into(const float* query, const PackedRows& rows, TopK& top);

/// Writes the score of `query` against every row, in packed order.
void scan_all(const float* query, const PackedRows& rows, std::span<double> out);

/// Parallel top-k: result[i] = best `k` rows for query row i (k clamped to
/// rows.size()).
std::vector<std::vector<SearchHit>> topk_search(const EmbeddingMatrix& queries,
                                                const PackedRows& rows, std::size_t k);

/// Parallel dense score matrix, result[i * rows.rows() + j] = dot(q_i, r_j).
std::vector<double> score_matrix(const EmbeddingMatrix& queries, const EmbeddingMatrix& rows);

/// Parallel per-row log-sum-exp: out[j] = log sum_i exp(beta * dot(ref_i, row_j)).
std::vector<double> logsumexp_rows(const EmbeddingMatrix& rows, const EmbeddingMatrix& refs,
                                   double beta);

/// Serial reference implementations. Straight double loops with no packing,
/// kept as the oracle for the kernels above.
namespace reference {

std::vector<std::vector<SearchHit>> topk_search(const EmbeddingMatrix& queries,
                                                const EmbeddingMatrix& rows, std::size_t k);

std::vector<double> score_matrix(const EmbeddingMatrix& queries, const EmbeddingMatrix& rows);

std::vector<double> logsumexp_rows(const EmbeddingMatrix& rows, const EmbeddingMatrix& refs,
                                   double beta);

}  // namespace reference

}  // namespace kernels
}  // namespace nnn
