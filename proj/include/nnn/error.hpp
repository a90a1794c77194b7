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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nnn {

enum class ErrorCode {
    kBadMagic,
    kTruncatedFile,
    kNonFiniteValue,
    kIoError,
    kRaggedRows,
    kZeroVectorOnNormalize,
    kParseError,
    kInvalidArgument,
    kDimMismatch,
    kLengthMismatch,
    kKTooLarge,
    kEmptyReferenceSet,
    kMissingReference,
    kIndexOutOfRange,
    kDegenerateDistribution,
    kMissingTruth,
    kEmptyInput,
    kInsufficientData,
    kUnlabeledCandidate,
};

/// Canonical name of an error code, e.g. "BadMagic". The CLI prints these
/// verbatim.
std::string_view error_name(ErrorCode code);

/// Every failure in the library surfaces as this exception. `offset()` is set
/// for file-format errors and names the byte position where decoding failed.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail,
          std::optional<std::uint64_t> offset = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }
    std::optional<std::uint64_t> offset() const noexcept { return offset_; }

private:
    ErrorCode code_;
    std::optional<std::uint64_t> offset_;
};

#define NNN_THROW(code, msg) throw ::nnn::Error((code), (msg))

#define NNN_CHECK(cond, code, msg)      \
    do {                                \
        if (!(cond)) {                  \
            NNN_THROW((code), (msg));   \
        }                               \
    } while (false)

}  // namespace nnn
