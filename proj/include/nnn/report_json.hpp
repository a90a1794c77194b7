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

// JSON shapes of the reports written by the command-line tool. Key order is
// fixed so identical inputs produce identical bytes.

#pragma once

#include <json.hpp>

#include "nnn/diagnostics.hpp"
#include "nnn/evaluation.hpp"
#include "nnn/normalization.hpp"

namespace nnn {

using Json = nlohmann::ordered_json;

Json to_json(const NormalizationSpec& spec);
NormalizationSpec spec_from_json(const Json& j);
Json to_json(const HubReport& report);
Json to_json(const HubDeltas& deltas);
Json to_json(const RecallReport& report);
Json to_json(const SweepResult& result);
Json to_json(const AttributeBiasReport& report);
Json to_json(const std::vector<AblationPoint>& points);

}  // namespace nnn
