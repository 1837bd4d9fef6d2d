// phone_inventory.h
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
// Phone alphabet and transcript corpora.
//
// Inventory file: one token per line, '#' starts a comment line, and a token
// may carry a tab-separated "special" tag (word boundary, punctuation,
// silence). Transcript file: Kaldi "text" convention, one utterance per line
// as "<utt-id> <tok> <tok> ...". Labels are opaque UTF-8 byte strings; no
// normalization is ever applied.

#ifndef PERSEL_PHONE_INVENTORY_H_
#define PERSEL_PHONE_INVENTORY_H_

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace persel {

// A single phone label. Non-empty, no whitespace; compared byte-wise.
class Phone {
 public:
  // Throws Error(kInvalidPhone) on an empty label or embedded whitespace.
  explicit Phone(std::string label);

  const std::string &label() const { return label_; }

  friend bool operator==(const Phone &, const Phone &) = default;
  friend std::strong_ordering operator<=>(const Phone &a, const Phone &b) {
    return a.label_.compare(b.label_) <=> 0;
  }

 private:
  std::string label_;
};

using PhoneSequence = std::vector<Phone>;

// Splits `text` on spaces/tabs and builds a sequence. Convenience for tests
// and the CLI's inline sequences.
PhoneSequence MakeSequence(std::string_view text);

// Space-joined labels.
std::string JoinLabels(std::span<const Phone> seq);

class PhoneInventory {
 public:
  PhoneInventory() = default;
  // Throws Error(kDuplicatePhone) if a label repeats within or across the
  // two sets, Error(kEmptyInventory) if `phones` is empty.
  PhoneInventory(std::vector<Phone> phones, std::vector<Phone> specials);

  const std::set<Phone> &phones() const { return phones_; }
  const std::set<Phone> &specials() const { return specials_; }

  bool Contains(const Phone &p) const;
  bool IsSpecial(const Phone &p) const { return specials_.count(p) > 0; }
  // Number of regular (non-special) phones.
  std::size_t size() const { return phones_.size(); }

 private:
  std::set<Phone> phones_;
  std::set<Phone> specials_;
};

PhoneInventory ParseInventory(std::string_view text);

struct Utterance {
  std::string id;
  PhoneSequence phones;

  friend bool operator==(const Utterance &, const Utterance &) = default;
};

// References must be non-empty; hypotheses may be empty (nothing decoded).
enum class CorpusRole { kReference, kHypothesis };

struct TranscriptOptions {
  CorpusRole role = CorpusRole::kReference;
  // Reject tokens outside the inventory instead of counting them.
  bool strict = false;
};

struct TranscriptCorpus {
  std::vector<Utterance> utterances;
  // Tokens not found in the inventory (non-strict parses only) with counts.
  std::map<std::string, std::size_t> unknown_tokens;
};

// Lines starting with '#' are treated as comments so generated fixtures can
// carry a provenance header.
TranscriptCorpus ParseTranscripts(std::string_view text,
                                  const PhoneInventory &inventory,
                                  const TranscriptOptions &options);

std::string SerializeTranscripts(std::span<const Utterance> utterances);

struct CoverageSummary {
  std::size_t unique_phones_present = 0;
  std::size_t inventory_size = 0;
  std::vector<std::string> missing_phones;
  std::size_t total_phone_occurrences = 0;
  // Every token seen in the corpus, specials and unknowns included.
  std::map<std::string, std::size_t> per_phone_counts;
};

CoverageSummary CoverageReport(std::span<const Utterance> corpus,
                               const PhoneInventory &inventory);

}  // namespace persel

#endif  // PERSEL_PHONE_INVENTORY_H_
