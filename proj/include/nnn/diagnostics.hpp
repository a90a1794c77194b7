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
#include <map>
#include <vector>

#include "nnn/ranking.hpp"

namespace nnn {

/// counts[c] = number of queries whose top-1 hit is candidate c.
struct MatchedCounts {
    std::vector<std::size_t> counts;
    std::size_t total_queries = 0;
};

/// Outlier statistics of a matched-count distribution.
struct HubReport {
    double kurtosis = 0.0;  // Fisher excess, population moments
    double mae = 0.0;       // mean |count - mean count|
    std::size_t max = 0;
    std::map<std::size_t, std::size_t> histogram;  // count -> number of candidates
};

struct HubDeltas {
    double kurtosis_delta = 0.0;
    double mae_delta = 0.0;
    double max_delta = 0.0;
    // after / before; NaN when before is zero.
    double kurtosis_ratio = 0.0;
    double mae_ratio = 0.0;
    double max_ratio = 0.0;
};

MatchedCounts matched_counts(const RankingTable& table, std::size_t n_candidates);

/// Throws DegenerateDistribution when fewer than two candidates or the counts
/// have zero variance.
HubReport hub_report(const MatchedCounts& mc);

/// after - before and after / before per metric.
HubDeltas compare_reports(const HubReport& before, const HubReport& after);

}  // namespace nnn
