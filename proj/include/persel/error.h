// error.h
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
//
// Error type shared by every persel module. Each failure carries a code so
// callers (and the CLI exit-code mapping) can branch without parsing text.

#ifndef PERSEL_ERROR_H_
#define PERSEL_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace persel {

enum class ErrorCode {
  // phone-inventory
  kInvalidPhone,
  kDuplicatePhone,
  kEmptyInventory,
  kDuplicateUtterance,
  kUnknownPhone,
  kEmptyReference,
  // metrics
  kUndefinedRate,
  kEmptyCorpus,
  kReferenceMismatch,
  kIdMismatch,
  // ngram-lm
  kInvalidOrder,
  kZeroProbability,
  kArpaFormat,
  // sweep
  kDuplicateEpoch,
  kInvalidEpoch,
  kEmptySweep,
  kNoLossData,
  // corruption-sim
  kNoSubstituteAvailable,
  // preference
  kDuplicateBallot,
  kNoBallots,
  // shared
  kInvalidConfig,
  kParse,
  kIo,
};

// Stable name of a code, e.g. "DuplicatePhone".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const { return code_; }
  // 1-based input line, when the failure is tied to one.
  std::optional<std::size_t> line() const { return line_; }
  // The message without the code name and line decoration.
  const std::string &message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> line_;
};

}  // namespace persel

#endif  // PERSEL_ERROR_H_
