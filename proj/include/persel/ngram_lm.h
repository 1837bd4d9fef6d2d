// ngram_lm.h
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
// Phone-level back-off n-gram models.
//
// Every utterance is wrapped as <s> p1 ... pn </s>. The begin marker is a
// context only: it is stored as a unigram with probability zero (log10
// -99, the ARPA convention) so it can carry a back-off weight. Seen events
// get a discounted probability; the mass left over in a context is handed
// to the next-lower order through a back-off weight
//
//   bow(h) = leftover(h) / sum_{w unseen after h} p(w | h'),
//
// where h' is h without its oldest token. Witten-Bell discounting uses
// leftover(h) = T(h) / (c(h) + T(h)) with T(h) the number of distinct
// continuations; add-k uses (c(h,w) + k) / (c(h) + kV). The unigram level
// is interpolated with the uniform distribution over the vocabulary, so
// every vocabulary item has non-zero probability (except under add-0).

#ifndef PERSEL_NGRAM_LM_H_
#define PERSEL_NGRAM_LM_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persel/phone_inventory.h"

namespace persel {

inline constexpr const char *kSentenceBegin = "<s>";
inline constexpr const char *kSentenceEnd = "</s>";
inline constexpr const char *kUnknownToken = "<unk>";
// log10 of "probability zero" in ARPA files.
inline constexpr double kLogProbZero = -99.0;
// Probability assigned to out-of-vocabulary events under kMapToUnknown.
inline constexpr double kOovFloorProb = 1e-7;

enum class SmoothingKind { kWittenBell, kAddK };

struct Smoothing {
  SmoothingKind kind = SmoothingKind::kWittenBell;
  double k = 1.0;  // add-k only

  static Smoothing WittenBell() { return {SmoothingKind::kWittenBell, 0.0}; }
  static Smoothing AddK(double k) { return {SmoothingKind::kAddK, k}; }
  std::string Describe() const;
};

using NGram = std::vector<std::string>;

struct NGramEntry {
  double log10_prob = 0.0;
  std::optional<double> log10_backoff;
};

class NGramModel {
 public:
  // `levels[n - 1]` holds the n-grams. Checks the ARPA invariants (lengths,
  // stored prefixes, no back-off on the highest order, log-probs <= 0) and
  // throws Error(kArpaFormat) on violation.
  NGramModel(std::vector<std::map<NGram, NGramEntry>> levels,
             std::string comment = "");

  int order() const { return static_cast<int>(levels_.size()); }
  // n in [1, order()].
  const std::map<NGram, NGramEntry> &level(int n) const;
  const NGramEntry *Find(const NGram &ngram) const;
  const std::string &comment() const { return comment_; }
  std::size_t EntryCount() const;

  bool InVocabulary(const std::string &token) const;
  // Unigrams that can be predicted (everything but <s>), sorted.
  std::vector<std::string> PredictableVocabulary() const;

  // log10 p(word | history) by back-off. Only the last order()-1 history
  // tokens matter. Returns nullopt for out-of-vocabulary words.
  std::optional<double> LogProb(std::span<const std::string> history,
                                const std::string &word) const;

 private:
  std::vector<std::map<NGram, NGramEntry>> levels_;
  std::string comment_;
};

struct TrainOptions {
  int order = 3;
  Smoothing smoothing;
  // Added to the vocabulary even if unseen in training (closed vocabulary).
  std::vector<std::string> extra_vocabulary;
};

// Throws Error(kEmptyCorpus) for an empty corpus and Error(kInvalidOrder)
// for order < 1.
NGramModel TrainNGram(std::span<const Utterance> corpus,
                      const TrainOptions &options);

// Unigram model giving each of `tokens` plus </s> the same probability.
NGramModel UniformUnigram(std::span<const std::string> tokens);

enum class OovPolicy {
  kStrict,        // zero-probability or unknown events are errors
  kMapToUnknown,  // scored as <unk> if the model has it, else kOovFloorProb
};

struct PerplexityResult {
  double perplexity = 0.0;
  double log10_prob = 0.0;
  // Scored events, end markers included.
  std::size_t events = 0;
  std::size_t oov_events = 0;
  std::size_t floored_events = 0;
};

// 10^(-sum log10 p / T). Throws Error(kZeroProbability) under kStrict and
// Error(kEmptyCorpus) if there is nothing to score.
PerplexityResult Perplexity(const NGramModel &model,
                            std::span<const Utterance> corpus,
                            OovPolicy policy);

// ARPA text; log10 values with six decimals, entries in lexicographic order.
std::string ExportArpa(const NGramModel &model);
// Throws Error(kArpaFormat) with the offending line.
NGramModel ImportArpa(std::string_view text);

}  // namespace persel

#endif  // PERSEL_NGRAM_LM_H_
