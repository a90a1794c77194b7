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

#include "nnn/error.hpp"

namespace nnn {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kBadMagic: return "BadMagic";
        case ErrorCode::kTruncatedFile: return "TruncatedFile";
        case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
        case ErrorCode::kIoError: return "IoError";
        case ErrorCode::kRaggedRows: return "RaggedRows";
        case ErrorCode::kZeroVectorOnNormalize: return "ZeroVectorOnNormalize";
        case ErrorCode::kParseError: return "ParseError";
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kDimMismatch: return "DimMismatch";
        case ErrorCode::kLengthMismatch: return "LengthMismatch";
        case ErrorCode::kKTooLarge: return "KTooLarge";
        case ErrorCode::kEmptyReferenceSet: return "EmptyReferenceSet";
        case ErrorCode::kMissingReference: return "MissingReference";
        case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
        case ErrorCode::kMissingTruth: return "MissingTruth";
        case ErrorCode::kEmptyInput: return "EmptyInput";
        case ErrorCode::kInsufficientData: return "InsufficientData";
        case ErrorCode::kUnlabeledCandidate: return "UnlabeledCandidate";
    }
    return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& detail,
                           std::optional<std::uint64_t> offset) {
    std::string msg(error_name(code));
    if (!detail.empty()) {
        msg += ": ";
        msg += detail;
    }
    if (offset) {
        msg += " (at byte offset " + std::to_string(*offset) + ")";
    }
    return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& detail,
             std::optional<std::uint64_t> offset)
    : std::runtime_error(format_message(code, detail, offset)),
      code_(code),
      offset_(offset) {}

}  // namespace nnn
