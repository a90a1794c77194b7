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
#include <span>
#include <vector>

namespace nnn {

/// Dense row-major matrix of 32-bit embeddings. Immutable after construction.
///
/// Construction validates every invariant: `data.size() == rows * dim`,
/// `dim >= 1`, all values finite, and, when `normalized` is set, every row
/// has unit L2 norm within 1e-4.
class EmbeddingMatrix {
public:
    static constexpr double kNormTolerance = 1e-4;

    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                    bool normalized = false);

    /// Empty matrix of the given width.
    static EmbeddingMatrix empty(std::size_t dim);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    bool normalized() const noexcept { return normalized_; }
    bool is_empty() const noexcept { return rows_ == 0; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<const float> row(std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }

    /// New matrix holding the listed rows, in the listed order.
    EmbeddingMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 1;
    std::vector<float> data_;
    bool normalized_ = false;
};

/// L2 norm of a row in 64-bit arithmetic.
double row_norm(std::span<const float> v);

}  // namespace nnn
