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

#include "nnn/ranking.hpp"

#include <algorithm>
#include <json.hpp>

#include "nnn/error.hpp"

namespace nnn {

std::vector<SearchHit> rank_scores(std::span<const double> scores, std::size_t depth) {
    kernels::TopK top(std::min(depth, scores.size()));
    for (std::size_t j = 0; j < scores.size(); ++j) {
        top.push(static_cast<std::uint32_t>(j), scores[j]);
    }
    return top.take_sorted();
}

std::string to_jsonl(const RankingTable& table) {
    std::string out;
    for (std::size_t q = 0; q < table.size(); ++q) {
        nlohmann::ordered_json line;
        line["query"] = q;
        auto hits = nlohmann::ordered_json::array();
        for (const SearchHit& h : table[q]) {
            hits.push_back(nlohmann::ordered_json{{"cand", h.candidate}, {"score", h.score}});
        }
        line["hits"] = std::move(hits);
        out += line.dump();
        out += '\n';
    }
    return out;
}

RankingTable parse_jsonl(std::string_view text) {
    RankingTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            const auto q = obj.at("query").get<std::size_t>();
            NNN_CHECK(q == table.size(), ErrorCode::kParseError,
                      "line " + std::to_string(line_no) + ": queries must be consecutive from 0");
            std::vector<SearchHit> hits;
            for (const auto& h : obj.at("hits")) {
                hits.push_back({h.at("cand").get<std::uint32_t>(), h.at("score").get<double>()});
            }
            table.queries.push_back(std::move(hits));
        } catch (const nlohmann::json::exception& e) {
            NNN_THROW(ErrorCode::kParseError,
                      "line " + std::to_string(line_no) + ": " + std::string(e.what()));
        }
    }
    return table;
}

}  // namespace nnn
