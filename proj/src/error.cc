// error.cc
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
//
// Copyright 2026 The persel Authors. All Rights Reserved.

#include "persel/error.h"

namespace persel {
namespace {

std::string Decorate(ErrorCode code, const std::string &message,
                     std::optional<std::size_t> line) {
  std::string out(ErrorCodeName(code));
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPhone: return "InvalidPhone";
    case ErrorCode::kDuplicatePhone: return "DuplicatePhone";
    case ErrorCode::kEmptyInventory: return "EmptyInventory";
    case ErrorCode::kDuplicateUtterance: return "DuplicateUtterance";
    case ErrorCode::kUnknownPhone: return "UnknownPhone";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kUndefinedRate: return "UndefinedRate";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kReferenceMismatch: return "ReferenceMismatch";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kInvalidOrder: return "InvalidOrder";
    case ErrorCode::kZeroProbability: return "ZeroProbability";
    case ErrorCode::kArpaFormat: return "ArpaFormatError";
    case ErrorCode::kDuplicateEpoch: return "DuplicateEpoch";
    case ErrorCode::kInvalidEpoch: return "InvalidEpoch";
    case ErrorCode::kEmptySweep: return "EmptySweep";
    case ErrorCode::kNoLossData: return "NoLossData";
    case ErrorCode::kNoSubstituteAvailable: return "NoSubstituteAvailable";
    case ErrorCode::kDuplicateBallot: return "DuplicateBallot";
    case ErrorCode::kNoBallots: return "NoBallots";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message,
             std::optional<std::size_t> line)
    : std::runtime_error(Decorate(code, message, line)),
      code_(code),
      message_(message),
      line_(line) {}

}  // namespace persel
