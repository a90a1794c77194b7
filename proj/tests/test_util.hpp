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

// Helpers shared by the unit tests.

#pragma once

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "nnn/error.hpp"
#include "nnn/matrix.hpp"
#include "nnn/rng.hpp"

namespace nnn::testing {

/// Checks that `expr` throws nnn::Error with the given code.
#define CHECK_NNN_ERROR(expr, error_code)                              \
    do {                                                               \
        bool nnn_thrown_ = false;                                      \
        try {                                                          \
            (void)(expr);                                              \
        } catch (const ::nnn::Error& e) {                              \
            nnn_thrown_ = true;                                        \
            CHECK_MESSAGE(e.code() == (error_code), e.what());         \
        }                                                              \
        CHECK_MESSAGE(nnn_thrown_, "expected an nnn::Error: " #expr); \
    } while (false)

inline EmbeddingMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t dim,
                                     bool unit = true) {
    std::vector<float> data(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
        double norm = 0.0;
        std::vector<double> v(dim);
        for (double& x : v) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < dim; ++d) {
            data[i * dim + d] = static_cast<float>(unit && norm > 0 ? v[d] / norm : v[d]);
        }
    }
    return EmbeddingMatrix(rows, dim, std::move(data), unit);
}

inline EmbeddingMatrix matrix_of(std::size_t rows, std::size_t dim, std::vector<float> data) {
    return EmbeddingMatrix(rows, dim, std::move(data));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("nnn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace nnn::testing
