// alignment.cc
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

#include "persel/alignment.h"

#include <algorithm>
#include <utility>

#include "persel/error.h"

namespace persel {

char EditOpTag(EditOp op) {
  switch (op) {
    case EditOp::kMatch: return 'C';
    case EditOp::kSubstitute: return 'S';
    case EditOp::kDelete: return 'D';
    case EditOp::kInsert: return 'I';
  }
  return '?';
}

ErrorCounts &ErrorCounts::operator+=(const ErrorCounts &o) {
  correct += o.correct;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_length += o.ref_length;
  return *this;
}

Alignment::Alignment(std::vector<AlignmentOp> ops) : ops_(std::move(ops)) {
  for (const AlignmentOp &op : ops_) {
    const bool has_ref = op.ref.has_value();
    const bool has_hyp = op.hyp.has_value();
    switch (op.op) {
      case EditOp::kMatch:
        if (!has_ref || !has_hyp || *op.ref != *op.hyp) {
          throw Error(ErrorCode::kInvalidConfig, "malformed Match op");
        }
        ++counts_.correct;
        break;
      case EditOp::kSubstitute:
        if (!has_ref || !has_hyp || *op.ref == *op.hyp) {
          throw Error(ErrorCode::kInvalidConfig, "malformed Substitute op");
        }
        ++counts_.substitutions;
        break;
      case EditOp::kDelete:
        if (!has_ref || has_hyp) {
          throw Error(ErrorCode::kInvalidConfig, "malformed Delete op");
        }
        ++counts_.deletions;
        break;
      case EditOp::kInsert:
        if (has_ref || !has_hyp) {
          throw Error(ErrorCode::kInvalidConfig, "malformed Insert op");
        }
        ++counts_.insertions;
        break;
    }
  }
  counts_.ref_length =
      counts_.correct + counts_.substitutions + counts_.deletions;
}

Alignment Align(std::span<const Phone> reference,
                std::span<const Phone> hypothesis) {
  if (reference.empty()) {
    throw Error(ErrorCode::kEmptyReference, "cannot align an empty reference");
  }
  const std::vector<EditOp> trace =
      internal::AlignTrace<Phone>(reference, hypothesis);
  std::vector<AlignmentOp> ops;
  ops.reserve(trace.size());
  std::size_t i = 0;
  std::size_t j = 0;
  for (EditOp op : trace) {
    switch (op) {
      case EditOp::kMatch:
      case EditOp::kSubstitute:
        ops.push_back({op, reference[i++], hypothesis[j++]});
        break;
      case EditOp::kDelete:
        ops.push_back({op, reference[i++], std::nullopt});
        break;
      case EditOp::kInsert:
        ops.push_back({op, std::nullopt, hypothesis[j++]});
        break;
    }
  }
  return Alignment(std::move(ops));
}

std::size_t EditDistance(std::span<const Phone> reference,
                         std::span<const Phone> hypothesis) {
  const std::size_t m = hypothesis.size();
  std::vector<std::size_t> prev(m + 1);
  std::vector<std::size_t> cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub =
          prev[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

PhoneSequence ReplayAlignment(std::span<const Phone> reference,
                              const Alignment &alignment) {
  PhoneSequence out;
  std::size_t i = 0;
  for (const AlignmentOp &op : alignment.ops()) {
    if (op.op != EditOp::kInsert) {
      if (i >= reference.size() || reference[i] != *op.ref) {
        throw Error(ErrorCode::kInvalidConfig,
                    "alignment does not match reference at position " +
                        std::to_string(i));
      }
      ++i;
    }
    if (op.op != EditOp::kDelete) out.push_back(*op.hyp);
  }
  if (i != reference.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "alignment consumed " + std::to_string(i) + " of " +
                    std::to_string(reference.size()) + " reference phones");
  }
  return out;
}

std::string FormatAlignment(const Alignment &alignment) {
  std::string ref_row = "ref";
  std::string tag_row = "   ";
  std::string hyp_row = "hyp";
  for (const AlignmentOp &op : alignment.ops()) {
    const std::string r = op.ref ? op.ref->label() : "*";
    const std::string h = op.hyp ? op.hyp->label() : "*";
    const std::size_t width = std::max(r.size(), h.size());
    ref_row += ' ' + r + std::string(width - r.size(), ' ');
    tag_row += ' ' + std::string(1, EditOpTag(op.op)) +
               std::string(width - 1, ' ');
    hyp_row += ' ' + h + std::string(width - h.size(), ' ');
  }
  auto rstrip = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  return rstrip(ref_row) + '\n' + rstrip(tag_row) + '\n' + rstrip(hyp_row) +
         '\n';
}

}  // namespace persel
