// alignment.h
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
// Unit-cost Levenshtein alignment of a reference against a hypothesis.
//
// Traceback runs from the bottom-right cell and, at every cell, takes the
// first optimal move in the order Match, Substitute, Delete, Insert. The
// resulting op sequence is therefore a pure function of the inputs, which
// keeps per-phone tallies reproducible.

#ifndef PERSEL_ALIGNMENT_H_
#define PERSEL_ALIGNMENT_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persel/phone_inventory.h"

namespace persel {

enum class EditOp : std::uint8_t { kMatch, kSubstitute, kDelete, kInsert };

// Single-letter tag used in the three-row layout: C, S, D or I.
char EditOpTag(EditOp op);

struct ErrorCounts {
  std::uint64_t correct = 0;
  std::uint64_t substitutions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t insertions = 0;
  // N: reference length.
  std::uint64_t ref_length = 0;

  std::uint64_t errors() const {
    return substitutions + deletions + insertions;
  }
  std::uint64_t hyp_length() const {
    return correct + substitutions + insertions;
  }

  ErrorCounts &operator+=(const ErrorCounts &o);
  friend bool operator==(const ErrorCounts &, const ErrorCounts &) = default;
};

struct AlignmentOp {
  EditOp op;
  std::optional<Phone> ref;  // absent for kInsert
  std::optional<Phone> hyp;  // absent for kDelete

  friend bool operator==(const AlignmentOp &, const AlignmentOp &) = default;
};

class Alignment {
 public:
  // Validates op shapes (a Substitute must change the phone, a Match must
  // not) and derives the counts. Throws Error(kInvalidConfig) otherwise.
  explicit Alignment(std::vector<AlignmentOp> ops);

  const std::vector<AlignmentOp> &ops() const { return ops_; }
  const ErrorCounts &counts() const { return counts_; }

 private:
  std::vector<AlignmentOp> ops_;
  ErrorCounts counts_;
};

// Minimum-edit-distance alignment. Throws Error(kEmptyReference) when the
// reference is empty.
Alignment Align(std::span<const Phone> reference,
                std::span<const Phone> hypothesis);

// Unit-cost Levenshtein distance; both sides may be empty.
std::size_t EditDistance(std::span<const Phone> reference,
                         std::span<const Phone> hypothesis);

// Applies the ops to `reference` and returns the sequence they produce.
// Throws Error(kInvalidConfig) if the ops do not consume `reference` exactly.
PhoneSequence ReplayAlignment(std::span<const Phone> reference,
                              const Alignment &alignment);

// Three rows ("ref", tags, "hyp") with columns padded to a common width;
// '*' marks the empty side of a deletion or insertion.
std::string FormatAlignment(const Alignment &alignment);

namespace internal {

// DP core shared by phone- and word-level scoring. T needs operator==.
template <typename T>
std::vector<EditOp> AlignTrace(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> cost((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) cost[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    std::uint32_t *row = &cost[i * w];
    const std::uint32_t *up = &cost[(i - 1) * w];
    row[0] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = up[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::uint32_t del = up[j] + 1;
      const std::uint32_t ins = row[j - 1] + 1;
      row[j] = std::min(diag, std::min(del, ins));
    }
  }

  std::vector<EditOp> trace;
  trace.reserve(n + m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = cost[i * w + j];
    if (i > 0 && j > 0) {
      const std::uint32_t diag = cost[(i - 1) * w + (j - 1)];
      const bool same = ref[i - 1] == hyp[j - 1];
      if (same && diag == here) {
        trace.push_back(EditOp::kMatch);
        --i, --j;
        continue;
      }
      if (!same && diag + 1 == here) {
        trace.push_back(EditOp::kSubstitute);
        --i, --j;
        continue;
      }
    }
    if (i > 0 && cost[(i - 1) * w + j] + 1 == here) {
      trace.push_back(EditOp::kDelete);
      --i;
      continue;
    }
    trace.push_back(EditOp::kInsert);
    --j;
  }
  return {trace.rbegin(), trace.rend()};
}

}  // namespace internal
}  // namespace persel

#endif  // PERSEL_ALIGNMENT_H_
