// metrics.h
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
// Phone/word error rates, per-phone detection statistics and two-model
// detection comparisons.
//
// Rates are exact fractions (S + D + I) / N. Corpus rates pool raw counts
// over utterances; they are never a mean of per-utterance rates. A phone
// counts as "correctly detected" when the deterministic alignment emits a
// Match op on it.

#ifndef PERSEL_METRICS_H_
#define PERSEL_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "persel/alignment.h"
#include "persel/phone_inventory.h"
#include "persel/rational.h"

namespace persel {

inline constexpr int kDefaultPrecision = 4;
inline constexpr const char *kDefaultSilence = "sil";
inline constexpr const char *kDefaultBoundary = "|";

// Selects which tokens enter alignment. The description is written into
// every report so scores can be interpreted later.
class ScoringFilter {
 public:
  // Scores everything except the silence phone and the word boundary.
  static ScoringFilter Default(const std::string &silence = kDefaultSilence,
                               const std::string &boundary = kDefaultBoundary);
  // Scores every token.
  static ScoringFilter AllTokens();
  // Drops every special token of the inventory.
  static ScoringFilter PhonesOnly(const PhoneInventory &inventory);

  bool Excludes(const Phone &p) const { return excluded_.count(p.label()) > 0; }
  PhoneSequence Apply(std::span<const Phone> seq) const;
  // Like Apply() but always keeps `keep` (used to retain word boundaries).
  PhoneSequence ApplyKeeping(std::span<const Phone> seq,
                             const Phone &keep) const;
  const std::set<std::string> &excluded() const { return excluded_; }
  std::string Describe() const;

 private:
  std::set<std::string> excluded_;
};

// (S + D + I) / N. Throws Error(kUndefinedRate) when N is zero.
Rational ErrorRate(const ErrorCounts &counts);
Rational Per(const Alignment &alignment);

struct ScoredUtterance {
  std::string id;
  Alignment alignment;
};

struct ErrorRateReport {
  std::map<std::string, ErrorCounts> per_utterance;
  ErrorCounts pooled;

  Rational PooledRate() const { return ErrorRate(pooled); }
};

// Pools counts over utterances. Throws Error(kEmptyCorpus) on empty input
// and Error(kDuplicateUtterance) if an id repeats.
ErrorRateReport CorpusPer(std::span<const ScoredUtterance> scored);

// Matches hypotheses to references by id. The result is index-aligned with
// `references`; nullptr marks a missing hypothesis, which is scored as an
// empty decode. Throws Error(kIdMismatch) for hypothesis ids absent from the
// references.
std::vector<const Utterance *> PairHypotheses(
    std::span<const Utterance> references,
    std::span<const Utterance> hypotheses);

// Filters and aligns every reference against its hypothesis, in reference
// order. Throws Error(kEmptyReference) if filtering empties a reference.
std::vector<ScoredUtterance> ScoreCorpus(std::span<const Utterance> references,
                                         std::span<const Utterance> hypotheses,
                                         const ScoringFilter &filter,
                                         int threads = 1);

// Maximal runs of non-boundary phones. Empty runs are dropped.
std::vector<PhoneSequence> SplitWords(std::span<const Phone> seq,
                                      const Phone &boundary);

// Word-level counts; N is the reference word count (may be zero).
ErrorCounts WordErrorCounts(std::span<const Phone> reference,
                            std::span<const Phone> hypothesis,
                            const Phone &boundary);

// Throws Error(kUndefinedRate) when the reference has no words.
Rational WordErrorRate(std::span<const Phone> reference,
                       std::span<const Phone> hypothesis,
                       const Phone &boundary);

// Pooled word counts over a corpus, paired like ScoreCorpus. Filtered tokens
// other than the boundary are removed before splitting.
ErrorCounts CorpusWordErrors(std::span<const Utterance> references,
                             std::span<const Utterance> hypotheses,
                             const ScoringFilter &filter,
                             const Phone &boundary);

struct PhoneTally {
  std::uint64_t occurrences = 0;
  std::uint64_t correct = 0;
  std::uint64_t deleted = 0;
  std::map<std::string, std::uint64_t> substituted_as;

  std::uint64_t substituted() const;
  friend bool operator==(const PhoneTally &, const PhoneTally &) = default;
};

// Per-reference-phone outcome tallies. Insertions are tracked separately
// since they have no reference phone.
class PhoneStats {
 public:
  void Add(const Alignment &alignment);

  const std::map<std::string, PhoneTally> &tallies() const { return tallies_; }
  const std::map<std::string, std::uint64_t> &inserted() const {
    return inserted_;
  }
  std::uint64_t TotalOccurrences() const;
  std::uint64_t TotalCorrect() const;

 private:
  std::map<std::string, PhoneTally> tallies_;
  std::map<std::string, std::uint64_t> inserted_;
};

PhoneStats ComputePhoneStats(std::span<const Alignment> alignments);
PhoneStats ComputePhoneStats(std::span<const ScoredUtterance> scored);

struct DetectionDelta {
  std::string phone;
  std::uint64_t occurrences = 0;
  std::uint64_t correct_a = 0;
  std::uint64_t correct_b = 0;
  std::int64_t difference = 0;  // correct_b - correct_a

  friend bool operator==(const DetectionDelta &,
                         const DetectionDelta &) = default;
};

struct DetectionReport {
  // Sorted by difference descending, then occurrences descending, then label.
  std::vector<DetectionDelta> deltas;
  std::size_t improved = 0;
  std::size_t unchanged = 0;
  std::size_t reduced = 0;
  std::uint64_t total_occurrences = 0;
  std::uint64_t total_correct_a = 0;
  std::uint64_t total_correct_b = 0;

  std::vector<DetectionDelta> Top(std::size_t k) const;
  // The last k rows of `deltas`, in the same order.
  std::vector<DetectionDelta> Bottom(std::size_t k) const;
};

// Throws Error(kReferenceMismatch) unless both stats saw the same reference
// phones with the same occurrence counts.
DetectionReport CompareDetection(const PhoneStats &a, const PhoneStats &b);

// Serialization.
nlohmann::ordered_json RateToJson(const Rational &rate, int precision);
nlohmann::ordered_json CountsToJson(const ErrorCounts &counts, int precision);
nlohmann::ordered_json ErrorReportToJson(const ErrorRateReport &report,
                                         int precision);
nlohmann::ordered_json PhoneStatsToJson(const PhoneStats &stats);
nlohmann::ordered_json DetectionToJson(const DetectionReport &report,
                                       std::size_t k);

// Header "phone,occurrences,correct_a,correct_b,difference".
std::string DetectionCsv(const DetectionReport &report);

std::string FormatCounts(const std::string &label, const ErrorCounts &counts,
                         int precision);
std::string FormatPhoneStats(const PhoneStats &stats);
std::string FormatDetection(const DetectionReport &report, std::size_t k);

}  // namespace persel

#endif  // PERSEL_METRICS_H_
