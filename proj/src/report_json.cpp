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

#include "nnn/report_json.hpp"

#include <cmath>
#include <string>

#include "nnn/error.hpp"

namespace nnn {

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json r_at_json(const std::map<std::size_t, double>& r_at) {
    Json j = Json::object();
    for (const auto& [k, v] : r_at) j[std::to_string(k)] = v;
    return j;
}

}  // namespace

Json to_json(const NormalizationSpec& spec) {
    Json j;
    j["method"] = std::string(method_name(spec.method));
    if (spec.alpha) j["alpha"] = *spec.alpha;
    if (spec.k) j["k"] = *spec.k;
    if (spec.beta1) j["beta1"] = *spec.beta1;
    if (spec.beta2) j["beta2"] = *spec.beta2;
    if (spec.activation_threshold) j["activation_threshold"] = *spec.activation_threshold;
    return j;
}

NormalizationSpec spec_from_json(const Json& j) {
    try {
        NormalizationSpec spec;
        spec.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("alpha")) spec.alpha = j["alpha"].get<double>();
        if (j.contains("k")) spec.k = j["k"].get<std::size_t>();
        if (j.contains("beta1")) spec.beta1 = j["beta1"].get<double>();
        if (j.contains("beta2")) spec.beta2 = j["beta2"].get<double>();
        if (j.contains("activation_threshold")) {
            spec.activation_threshold = j["activation_threshold"].get<std::size_t>();
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        NNN_THROW(ErrorCode::kParseError, std::string("method record: ") + e.what());
    }
}

Json to_json(const HubReport& report) {
    Json hist = Json::object();
    for (const auto& [count, freq] : report.histogram) hist[std::to_string(count)] = freq;
    Json j;
    j["kurtosis"] = report.kurtosis;
    j["mae"] = report.mae;
    j["max"] = report.max;
    j["histogram"] = std::move(hist);
    return j;
}

Json to_json(const HubDeltas& d) {
    Json j;
    j["kurtosis_delta"] = d.kurtosis_delta;
    j["mae_delta"] = d.mae_delta;
    j["max_delta"] = d.max_delta;
    j["kurtosis_ratio"] = finite_or_null(d.kurtosis_ratio);
    j["mae_ratio"] = finite_or_null(d.mae_ratio);
    j["max_ratio"] = finite_or_null(d.max_ratio);
    return j;
}

Json to_json(const RecallReport& report) {
    Json ci = Json::object();
    for (const auto& [k, iv] : report.ci) ci[std::to_string(k)] = Json::array({iv.lo, iv.hi});
    Json j;
    j["r_at"] = r_at_json(report.r_at);
    j["ci"] = std::move(ci);
    j["n_queries"] = report.n_queries;
    j["method"] = to_json(report.method);
    return j;
}

Json to_json(const SweepResult& result) {
    auto cell = [](const SweepCell& c) {
        Json j;
        j["alpha"] = c.alpha;
        j["k"] = c.k;
        j["recall_at_1"] = c.recall_at_1;
        return j;
    };
    Json grid = Json::array();
    for (const SweepCell& c : result.grid) grid.push_back(cell(c));
    Json j;
    j["grid"] = std::move(grid);
    j["best"] = cell(result.best);
    j["raw_recall_at_1"] = result.raw_recall_at_1;
    j["split_seed"] = result.split_seed;
    j["n_validation"] = result.n_validation;
    j["n_reference"] = result.n_reference;
    return j;
}

Json to_json(const AttributeBiasReport& report) {
    Json groups = Json::object();
    for (const auto& [g, v] : report.per_group) groups[g] = v;
    Json j;
    j["mean_bias"] = report.mean_bias;
    j["per_group"] = std::move(groups);
    j["per_query"] = report.per_query;
    return j;
}

Json to_json(const std::vector<AblationPoint>& points) {
    Json arr = Json::array();
    for (const AblationPoint& p : points) {
        Json j;
        j["fraction"] = p.fraction;
        j["n_reference"] = p.n_reference;
        j["r_at"] = r_at_json(p.r_at);
        j["warnings"] = p.warnings;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace nnn
