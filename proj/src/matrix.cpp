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

#include "nnn/matrix.hpp"

#include <cmath>
#include <string>

#include "nnn/error.hpp"

namespace nnn {

double row_norm(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) {
        acc += static_cast<double>(x) * static_cast<double>(x);
    }
    return std::sqrt(acc);
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim,
                                 std::vector<float> data, bool normalized)
    : rows_(rows), dim_(dim), data_(std::move(data)), normalized_(normalized) {
    NNN_CHECK(dim_ >= 1, ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
    NNN_CHECK(data_.size() == rows_ * dim_, ErrorCode::kLengthMismatch,
              "payload holds " + std::to_string(data_.size()) + " values, expected " +
                  std::to_string(rows_ * dim_));
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            NNN_THROW(ErrorCode::kNonFiniteValue,
                      "value at row " + std::to_string(i / dim_) + ", column " +
                          std::to_string(i % dim_));
        }
    }
    if (normalized_) {
        for (std::size_t r = 0; r < rows_; ++r) {
            const double norm = row_norm(row(r));
            NNN_CHECK(std::abs(norm - 1.0) <= kNormTolerance, ErrorCode::kInvalidArgument,
                      "row " + std::to_string(r) + " flagged normalized but has norm " +
                          std::to_string(norm));
        }
    }
}

EmbeddingMatrix EmbeddingMatrix::empty(std::size_t dim) {
    return EmbeddingMatrix(0, dim, {}, false);
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t idx : indices) {
        NNN_CHECK(idx < rows_, ErrorCode::kIndexOutOfRange,
                  "row " + std::to_string(idx) + " of " + std::to_string(rows_));
        const auto r = row(idx);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(indices.size(), dim_, std::move(out), normalized_);
}

}  // namespace nnn
