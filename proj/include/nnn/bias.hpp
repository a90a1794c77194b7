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

#include <cstdint>
#include <vector>

namespace nnn {

/// Per-candidate additive bias together with the parameters that produced it.
/// `k` is the neighbour count actually used (after clamping to the size of the
/// reference set), `ref_fingerprint` identifies that reference set.
struct BiasVector {
    std::vector<float> values;
    double alpha = 0.0;
    std::uint32_t k = 1;
    std::uint64_t ref_fingerprint = 0;

    std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const BiasVector&, const BiasVector&) = default;
};

}  // namespace nnn
