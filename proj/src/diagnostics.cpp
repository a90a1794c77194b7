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

#include "nnn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nnn/error.hpp"

namespace nnn {

MatchedCounts matched_counts(const RankingTable& table, std::size_t n_candidates) {
    MatchedCounts mc;
    mc.counts.assign(n_candidates, 0);
    for (std::size_t q = 0; q < table.size(); ++q) {
        if (table[q].empty()) continue;
        const std::size_t c = table[q].front().candidate;
        NNN_CHECK(c < n_candidates, ErrorCode::kIndexOutOfRange,
                  "query " + std::to_string(q) + " top-1 candidate " + std::to_string(c) +
                      " >= " + std::to_string(n_candidates));
        ++mc.counts[c];
        ++mc.total_queries;
    }
    return mc;
}

HubReport hub_report(const MatchedCounts& mc) {
    const std::size_t n = mc.counts.size();
    NNN_CHECK(n >= 2, ErrorCode::kDegenerateDistribution, "need at least two candidates");
    double mean = 0.0;
    for (std::size_t c : mc.counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(n);

    double m2 = 0.0;
    double m4 = 0.0;
    double abs_dev = 0.0;
    for (std::size_t c : mc.counts) {
        const double d = static_cast<double>(c) - mean;
        m2 += d * d;
        m4 += d * d * d * d;
        abs_dev += std::abs(d);
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    NNN_CHECK(m2 > 0.0, ErrorCode::kDegenerateDistribution, "matched counts have zero variance");

    HubReport report;
    report.kurtosis = m4 / (m2 * m2) - 3.0;
    report.mae = abs_dev / static_cast<double>(n);
    report.max = *std::max_element(mc.counts.begin(), mc.counts.end());
    for (std::size_t c : mc.counts) ++report.histogram[c];
    return report;
}

HubDeltas compare_reports(const HubReport& before, const HubReport& after) {
    auto ratio = [](double a, double b) {
        return b == 0.0 ? std::numeric_limits<double>::quiet_NaN() : a / b;
    };
    const auto max_before = static_cast<double>(before.max);
    const auto max_after = static_cast<double>(after.max);
    return {after.kurtosis - before.kurtosis,
            after.mae - before.mae,
            max_after - max_before,
            ratio(after.kurtosis, before.kurtosis),
            ratio(after.mae, before.mae),
            ratio(max_after, max_before)};
}

}  // namespace nnn
