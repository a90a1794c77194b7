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

#include <string>
#include <string_view>
#include <vector>

#include "nnn/kernels.hpp"

namespace nnn {

/// Per-query ranked hits. Row i belongs to query i; hits are ordered by
/// `ranks_before` with no repeated candidate.
struct RankingTable {
    std::vector<std::vector<SearchHit>> queries;

    std::size_t size() const noexcept { return queries.size(); }
    const std::vector<SearchHit>& operator[](std::size_t i) const { return queries[i]; }

    friend bool operator==(const RankingTable&, const RankingTable&) = default;
};

/// Top `depth` of a full score row, ranked with the standard tie-break.
std::vector<SearchHit> rank_scores(std::span<const double> scores, std::size_t depth);

/// JSON-lines, one object per query: {"query":i,"hits":[{"cand":c,"score":s},...]}.
std::string to_jsonl(const RankingTable& table);
RankingTable parse_jsonl(std::string_view text);

}  // namespace nnn
