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

#include "nnn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nnn::kernels {

namespace {

// Heap comparator: "a is better than b" puts the worst element at the front.
struct WorstOnTop {
    bool operator()(const SearchHit& a, const SearchHit& b) const noexcept {
        return ranks_before(a, b);
    }
};

std::int64_t as_loop_bound(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

void TopK::push(std::uint32_t candidate, double score) {
    if (k_ == 0) return;
    const SearchHit hit{candidate, score};
    if (heap_.size() < k_) {
        heap_.push_back(hit);
        std::push_heap(heap_.begin(), heap_.end(), WorstOnTop{});
        return;
    }
    if (!ranks_before(hit, heap_.front())) return;
    std::pop_heap(heap_.begin(), heap_.end(), WorstOnTop{});
    heap_.back() = hit;
    std::push_heap(heap_.begin(), heap_.end(), WorstOnTop{});
}

std::vector<SearchHit> TopK::take_sorted() {
    std::vector<SearchHit> out = std::move(heap_);
    heap_ = {};
    heap_.reserve(k_);
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

PackedRows::PackedRows(const EmbeddingMatrix& m)
    : PackedRows(m, [&] {
          std::vector<std::uint32_t> ids(m.rows());
          std::iota(ids.begin(), ids.end(), 0U);
          return ids;
      }()) {}

PackedRows::PackedRows(const EmbeddingMatrix& m, std::vector<std::uint32_t> ids)
    : dim_(m.dim()), ids_(std::move(ids)) {
    data_.assign(blocks() * dim_ * kWidth, 0.0F);
    for (std::size_t slot = 0; slot < ids_.size(); ++slot) {
        const auto row = m.row(ids_[slot]);
        float* dst = data_.data() + (slot / kWidth) * dim_ * kWidth + slot % kWidth;
        for (std::size_t d = 0; d < dim_; ++d) dst[d * kWidth] = row[d];
    }
}

void score_block(const float* query, const float* block, std::size_t dim, double* out) noexcept {
    constexpr std::size_t W = PackedRows::kWidth;
    double acc[W] = {};
    for (std::size_t d = 0; d < dim; ++d) {
        const double q = static_cast<double>(query[d]);
        const float* col = block + d * W;
        for (std::size_t j = 0; j < W; ++j) {
            acc[j] += q * static_cast<double>(col[j]);
        }
    }
    for (std::size_t j = 0; j < W; ++j) out[j] = acc[j];
}

void scan_into(const float* query, const PackedRows& rows, TopK& top) {
    constexpr std::size_t W = PackedRows::kWidth;
    const auto ids = rows.ids();
    double scores[W];
    double floor = top.floor();
    for (std::size_t b = 0; b < rows.blocks(); ++b) {
        score_block(query, rows.block(b), rows.dim(), scores);
        const std::size_t n = std::min(W, ids.size() - b * W);
        for (std::size_t j = 0; j < n; ++j) {
            if (scores[j] < floor) continue;
            top.push(ids[b * W + j], scores[j]);
            floor = top.floor();
        }
    }
}

void scan_all(const float* query, const PackedRows& rows, std::span<double> out) {
    constexpr std::size_t W = PackedRows::kWidth;
    double scores[W];
    for (std::size_t b = 0; b < rows.blocks(); ++b) {
        score_block(query, rows.block(b), rows.dim(), scores);
        const std::size_t n = std::min(W, rows.size() - b * W);
        std::copy_n(scores, n, out.begin() + static_cast<std::ptrdiff_t>(b * W));
    }
}

std::vector<std::vector<SearchHit>> topk_search(const EmbeddingMatrix& queries,
                                                const PackedRows& rows, std::size_t k) {
    std::vector<std::vector<SearchHit>> result(queries.rows());
    const std::size_t kk = std::min(k, rows.size());
#pragma omp parallel
    {
        TopK top(kk);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < as_loop_bound(queries.rows()); ++i) {
            scan_into(queries.row(static_cast<std::size_t>(i)).data(), rows, top);
            result[static_cast<std::size_t>(i)] = top.take_sorted();
        }
    }
    return result;
}

std::vector<double> score_matrix(const EmbeddingMatrix& queries, const EmbeddingMatrix& rows) {
    const PackedRows packed(rows);
    std::vector<double> out(queries.rows() * rows.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < as_loop_bound(queries.rows()); ++i) {
        const auto q = static_cast<std::size_t>(i);
        scan_all(queries.row(q).data(), packed,
                 std::span<double>(out.data() + q * rows.rows(), rows.rows()));
    }
    return out;
}

namespace {

double stable_logsumexp(std::span<const double> scores, double beta) {
    double max_exp = -std::numeric_limits<double>::infinity();
    for (double s : scores) max_exp = std::max(max_exp, beta * s);
    double sum = 0.0;
    for (double s : scores) sum += std::exp(beta * s - max_exp);
    return max_exp + std::log(sum);
}

}  // namespace

std::vector<double> logsumexp_rows(const EmbeddingMatrix& rows, const EmbeddingMatrix& refs,
                                   double beta) {
    const PackedRows packed(refs);
    std::vector<double> out(rows.rows());
#pragma omp parallel
    {
        std::vector<double> scores(refs.rows());
#pragma omp for schedule(static)
        for (std::int64_t j = 0; j < as_loop_bound(rows.rows()); ++j) {
            const auto r = static_cast<std::size_t>(j);
            scan_all(rows.row(r).data(), packed, scores);
            out[r] = stable_logsumexp(scores, beta);
        }
    }
    return out;
}

namespace reference {

std::vector<std::vector<SearchHit>> topk_search(const EmbeddingMatrix& queries,
                                                const EmbeddingMatrix& rows, std::size_t k) {
    std::vector<std::vector<SearchHit>> result(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        std::vector<SearchHit> all(rows.rows());
        for (std::size_t j = 0; j < rows.rows(); ++j) {
            all[j] = {static_cast<std::uint32_t>(j), dot(queries.row(i), rows.row(j))};
        }
        std::sort(all.begin(), all.end(), ranks_before);
        all.resize(std::min(k, all.size()));
        result[i] = std::move(all);
    }
    return result;
}

std::vector<double> score_matrix(const EmbeddingMatrix& queries, const EmbeddingMatrix& rows) {
    std::vector<double> out(queries.rows() * rows.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        for (std::size_t j = 0; j < rows.rows(); ++j) {
            out[i * rows.rows() + j] = dot(queries.row(i), rows.row(j));
        }
    }
    return out;
}

std::vector<double> logsumexp_rows(const EmbeddingMatrix& rows, const EmbeddingMatrix& refs,
                                   double beta) {
    std::vector<double> out(rows.rows());
    std::vector<double> scores(refs.rows());
    for (std::size_t j = 0; j < rows.rows(); ++j) {
        for (std::size_t i = 0; i < refs.rows(); ++i) scores[i] = dot(refs.row(i), rows.row(j));
        out[j] = stable_logsumexp(scores, beta);
    }
    return out;
}

}  // namespace reference

}  // namespace nnn::kernels
