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

// Binary and text formats for embeddings, bias caches, and labels.
//
// EMB1 (all integers and floats little-endian):
//   0  "EMB1"
//   4  u32 version = 1
//   8  u32 rows
//   12 u32 dim
//   16 u8  dtype = 1 (f32)
//   17 u8  normalized (0/1)
//   18 6 zero bytes
//   24 rows * dim f32, row-major
//
// BIA1:
//   0  "BIA1"
//   4  u32 version = 1
//   8  u32 n
//   12 f64 alpha
//   20 u32 k
//   24 u32 zero
//   28 u64 reference fingerprint
//   36 n f32

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnn/bias.hpp"
#include "nnn/matrix.hpp"

namespace nnn {

inline constexpr std::size_t kMatrixHeaderBytes = 24;
inline constexpr std::size_t kBiasHeaderBytes = 36;

std::vector<std::uint8_t> encode_matrix(const EmbeddingMatrix& m);
EmbeddingMatrix decode_matrix(std::span<const std::uint8_t> bytes);

EmbeddingMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);

/// Parses tab-separated decimal rows. Lines starting with '#' and blank lines
/// are skipped. With `normalize`, every row is scaled to unit L2 norm.
EmbeddingMatrix parse_tsv(std::string_view text, bool normalize);
EmbeddingMatrix import_tsv(const std::filesystem::path& path, bool normalize);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t state = 0xcbf29ce484222325ULL);

/// FNV-1a over the EMB1 encoding of `m` (header, then payload).
std::uint64_t fingerprint(const EmbeddingMatrix& m);

std::vector<std::uint8_t> encode_bias(const BiasVector& bias);
BiasVector decode_bias(std::span<const std::uint8_t> bytes);

BiasVector load_bias(const std::filesystem::path& path);
void save_bias(const BiasVector& bias, const std::filesystem::path& path);

/// True when the bias was computed against `reference`.
bool bias_matches_reference(const BiasVector& bias, const EmbeddingMatrix& reference);

/// query index -> sorted, de-duplicated correct candidate indices.
struct GroundTruth {
    std::map<std::size_t, std::vector<std::size_t>> correct;

    const std::vector<std::size_t>* find(std::size_t query) const;
    /// Throws IndexOutOfRange if any index exceeds the given bounds.
    void validate(std::size_t n_queries, std::size_t n_candidates) const;
};

enum class Attribute : std::uint8_t { kA, kB };

struct CandidateLabel {
    Attribute attribute = Attribute::kA;
    std::string group;
};

using AttributeLabels = std::map<std::size_t, CandidateLabel>;
using QueryGroups = std::map<std::size_t, std::string>;

GroundTruth parse_truth(std::string_view text);
GroundTruth load_truth(const std::filesystem::path& path);

/// Format: "cand_idx<TAB>A|B<TAB>group" (group optional).
AttributeLabels parse_labels(std::string_view text);
AttributeLabels load_labels(const std::filesystem::path& path);

/// Format: "query_idx<TAB>group".
QueryGroups parse_query_groups(std::string_view text);
QueryGroups load_query_groups(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace nnn
