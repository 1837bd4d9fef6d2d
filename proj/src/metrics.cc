// metrics.cc
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

#include "persel/metrics.h"

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <utility>

#include "persel/error.h"
#include "persel/parallel.h"
#include "persel/text_table.h"

namespace persel {

ScoringFilter ScoringFilter::Default(const std::string &silence,
                                     const std::string &boundary) {
  ScoringFilter f;
  f.excluded_.insert(Phone(silence).label());
  f.excluded_.insert(Phone(boundary).label());
  return f;
}

ScoringFilter ScoringFilter::AllTokens() { return ScoringFilter(); }

ScoringFilter ScoringFilter::PhonesOnly(const PhoneInventory &inventory) {
  ScoringFilter f;
  for (const Phone &p : inventory.specials()) f.excluded_.insert(p.label());
  return f;
}

PhoneSequence ScoringFilter::Apply(std::span<const Phone> seq) const {
  PhoneSequence out;
  out.reserve(seq.size());
  for (const Phone &p : seq) {
    if (!Excludes(p)) out.push_back(p);
  }
  return out;
}

PhoneSequence ScoringFilter::ApplyKeeping(std::span<const Phone> seq,
                                          const Phone &keep) const {
  PhoneSequence out;
  out.reserve(seq.size());
  for (const Phone &p : seq) {
    if (p == keep || !Excludes(p)) out.push_back(p);
  }
  return out;
}

std::string ScoringFilter::Describe() const {
  if (excluded_.empty()) return "score all tokens";
  std::string out = "exclude {";
  bool first = true;
  for (const std::string &label : excluded_) {
    if (!first) out += ", ";
    out += label;
    first = false;
  }
  return out + "}";
}

Rational ErrorRate(const ErrorCounts &counts) {
  if (counts.ref_length == 0) {
    throw Error(ErrorCode::kUndefinedRate, "reference length is zero");
  }
  return Rational(counts.errors(), counts.ref_length);
}

Rational Per(const Alignment &alignment) {
  return ErrorRate(alignment.counts());
}

ErrorRateReport CorpusPer(std::span<const ScoredUtterance> scored) {
  if (scored.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no utterances to score");
  }
  ErrorRateReport report;
  for (const ScoredUtterance &s : scored) {
    const ErrorCounts &c = s.alignment.counts();
    if (!report.per_utterance.emplace(s.id, c).second) {
      throw Error(ErrorCode::kDuplicateUtterance, s.id);
    }
    report.pooled += c;
  }
  return report;
}

std::vector<const Utterance *> PairHypotheses(
    std::span<const Utterance> references,
    std::span<const Utterance> hypotheses) {
  std::unordered_map<std::string_view, const Utterance *> by_id;
  by_id.reserve(hypotheses.size());
  for (const Utterance &h : hypotheses) by_id.emplace(h.id, &h);

  std::vector<const Utterance *> paired;
  paired.reserve(references.size());
  std::size_t matched = 0;
  for (const Utterance &r : references) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      paired.push_back(nullptr);
    } else {
      paired.push_back(it->second);
      ++matched;
    }
  }
  if (matched != by_id.size()) {
    std::unordered_map<std::string_view, bool> ref_ids;
    for (const Utterance &r : references) ref_ids.emplace(r.id, true);
    std::string extra;
    for (const Utterance &h : hypotheses) {
      if (ref_ids.count(h.id) == 0) {
        extra = h.id;
        break;
      }
    }
    throw Error(ErrorCode::kIdMismatch,
                "hypothesis utterance '" + extra + "' has no reference");
  }
  return paired;
}

std::vector<ScoredUtterance> ScoreCorpus(std::span<const Utterance> references,
                                         std::span<const Utterance> hypotheses,
                                         const ScoringFilter &filter,
                                         int threads) {
  const std::vector<const Utterance *> paired =
      PairHypotheses(references, hypotheses);
  std::vector<std::optional<ScoredUtterance>> slots(references.size());
  ParallelFor(references.size(), threads, [&](std::size_t i) {
    const Utterance &ref = references[i];
    const PhoneSequence r = filter.Apply(ref.phones);
    if (r.empty()) {
      throw Error(ErrorCode::kEmptyReference,
                  "utterance '" + ref.id + "' has no scorable phones");
    }
    const PhoneSequence h =
        paired[i] ? filter.Apply(paired[i]->phones) : PhoneSequence();
    slots[i].emplace(ScoredUtterance{ref.id, Align(r, h)});
  });
  std::vector<ScoredUtterance> out;
  out.reserve(slots.size());
  for (auto &s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<PhoneSequence> SplitWords(std::span<const Phone> seq,
                                      const Phone &boundary) {
  std::vector<PhoneSequence> words;
  PhoneSequence current;
  for (const Phone &p : seq) {
    if (p == boundary) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(p);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

ErrorCounts WordErrorCounts(std::span<const Phone> reference,
                            std::span<const Phone> hypothesis,
                            const Phone &boundary) {
  const std::vector<PhoneSequence> ref_words = SplitWords(reference, boundary);
  const std::vector<PhoneSequence> hyp_words = SplitWords(hypothesis, boundary);
  ErrorCounts counts;
  for (EditOp op : internal::AlignTrace<PhoneSequence>(ref_words, hyp_words)) {
    switch (op) {
      case EditOp::kMatch: ++counts.correct; break;
      case EditOp::kSubstitute: ++counts.substitutions; break;
      case EditOp::kDelete: ++counts.deletions; break;
      case EditOp::kInsert: ++counts.insertions; break;
    }
  }
  counts.ref_length = ref_words.size();
  return counts;
}

Rational WordErrorRate(std::span<const Phone> reference,
                       std::span<const Phone> hypothesis,
                       const Phone &boundary) {
  return ErrorRate(WordErrorCounts(reference, hypothesis, boundary));
}

ErrorCounts CorpusWordErrors(std::span<const Utterance> references,
                             std::span<const Utterance> hypotheses,
                             const ScoringFilter &filter,
                             const Phone &boundary) {
  const std::vector<const Utterance *> paired =
      PairHypotheses(references, hypotheses);
  ErrorCounts pooled;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const PhoneSequence r = filter.ApplyKeeping(references[i].phones, boundary);
    const PhoneSequence h =
        paired[i] ? filter.ApplyKeeping(paired[i]->phones, boundary)
                  : PhoneSequence();
    pooled += WordErrorCounts(r, h, boundary);
  }
  return pooled;
}

std::uint64_t PhoneTally::substituted() const {
  std::uint64_t total = 0;
  for (const auto &[_, n] : substituted_as) total += n;
  return total;
}

void PhoneStats::Add(const Alignment &alignment) {
  for (const AlignmentOp &op : alignment.ops()) {
    if (op.op == EditOp::kInsert) {
      ++inserted_[op.hyp->label()];
      continue;
    }
    PhoneTally &t = tallies_[op.ref->label()];
    ++t.occurrences;
    switch (op.op) {
      case EditOp::kMatch: ++t.correct; break;
      case EditOp::kSubstitute: ++t.substituted_as[op.hyp->label()]; break;
      case EditOp::kDelete: ++t.deleted; break;
      case EditOp::kInsert: break;
    }
  }
}

std::uint64_t PhoneStats::TotalOccurrences() const {
  std::uint64_t total = 0;
  for (const auto &[_, t] : tallies_) total += t.occurrences;
  return total;
}

std::uint64_t PhoneStats::TotalCorrect() const {
  std::uint64_t total = 0;
  for (const auto &[_, t] : tallies_) total += t.correct;
  return total;
}

PhoneStats ComputePhoneStats(std::span<const Alignment> alignments) {
  PhoneStats stats;
  for (const Alignment &a : alignments) stats.Add(a);
  return stats;
}

PhoneStats ComputePhoneStats(std::span<const ScoredUtterance> scored) {
  PhoneStats stats;
  for (const ScoredUtterance &s : scored) stats.Add(s.alignment);
  return stats;
}

std::vector<DetectionDelta> DetectionReport::Top(std::size_t k) const {
  k = std::min(k, deltas.size());
  return {deltas.begin(), deltas.begin() + static_cast<std::ptrdiff_t>(k)};
}

std::vector<DetectionDelta> DetectionReport::Bottom(std::size_t k) const {
  k = std::min(k, deltas.size());
  return {deltas.end() - static_cast<std::ptrdiff_t>(k), deltas.end()};
}

DetectionReport CompareDetection(const PhoneStats &a, const PhoneStats &b) {
  const auto &ta = a.tallies();
  const auto &tb = b.tallies();
  if (ta.size() != tb.size()) {
    throw Error(ErrorCode::kReferenceMismatch,
                "phone sets differ: " + std::to_string(ta.size()) + " vs " +
                    std::to_string(tb.size()));
  }
  DetectionReport report;
  for (auto ia = ta.begin(), ib = tb.begin(); ia != ta.end(); ++ia, ++ib) {
    if (ia->first != ib->first ||
        ia->second.occurrences != ib->second.occurrences) {
      throw Error(ErrorCode::kReferenceMismatch,
                  "occurrence mismatch at phone '" + ia->first + "'");
    }
    DetectionDelta d;
    d.phone = ia->first;
    d.occurrences = ia->second.occurrences;
    d.correct_a = ia->second.correct;
    d.correct_b = ib->second.correct;
    d.difference = static_cast<std::int64_t>(d.correct_b) -
                   static_cast<std::int64_t>(d.correct_a);
    if (d.difference > 0) {
      ++report.improved;
    } else if (d.difference == 0) {
      ++report.unchanged;
    } else {
      ++report.reduced;
    }
    report.total_occurrences += d.occurrences;
    report.total_correct_a += d.correct_a;
    report.total_correct_b += d.correct_b;
    report.deltas.push_back(std::move(d));
  }
  std::sort(report.deltas.begin(), report.deltas.end(),
            [](const DetectionDelta &x, const DetectionDelta &y) {
              if (x.difference != y.difference) {
                return x.difference > y.difference;
              }
              if (x.occurrences != y.occurrences) {
                return x.occurrences > y.occurrences;
              }
              return x.phone < y.phone;
            });
  return report;
}

nlohmann::ordered_json RateToJson(const Rational &rate, int precision) {
  nlohmann::ordered_json j;
  j["numerator"] = rate.numerator();
  j["denominator"] = rate.denominator();
  j["decimal"] = rate.ToDecimal(precision);
  return j;
}

nlohmann::ordered_json CountsToJson(const ErrorCounts &counts, int precision) {
  nlohmann::ordered_json j;
  j["C"] = counts.correct;
  j["S"] = counts.substitutions;
  j["D"] = counts.deletions;
  j["I"] = counts.insertions;
  j["N"] = counts.ref_length;
  if (counts.ref_length > 0) {
    j["rate"] = RateToJson(ErrorRate(counts), precision);
  } else {
    j["rate"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json ErrorReportToJson(const ErrorRateReport &report,
                                         int precision) {
  nlohmann::ordered_json j;
  j["pooled"] = CountsToJson(report.pooled, precision);
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto &[id, counts] : report.per_utterance) {
    per[id] = CountsToJson(counts, precision);
  }
  j["per_utterance"] = std::move(per);
  return j;
}

nlohmann::ordered_json PhoneStatsToJson(const PhoneStats &stats) {
  nlohmann::ordered_json j;
  j["correct_definition"] =
      "Match op on the reference phone under the deterministic alignment "
      "(tie-break Match > Substitute > Delete > Insert)";
  j["total_occurrences"] = stats.TotalOccurrences();
  j["total_correct"] = stats.TotalCorrect();
  nlohmann::ordered_json phones = nlohmann::ordered_json::object();
  for (const auto &[label, t] : stats.tallies()) {
    nlohmann::ordered_json row;
    row["occurrences"] = t.occurrences;
    row["correct"] = t.correct;
    row["deleted"] = t.deleted;
    nlohmann::ordered_json subs = nlohmann::ordered_json::object();
    for (const auto &[to, n] : t.substituted_as) subs[to] = n;
    row["substituted_as"] = std::move(subs);
    phones[label] = std::move(row);
  }
  j["phones"] = std::move(phones);
  nlohmann::ordered_json ins = nlohmann::ordered_json::object();
  for (const auto &[label, n] : stats.inserted()) ins[label] = n;
  j["inserted"] = std::move(ins);
  return j;
}

namespace {

nlohmann::ordered_json DeltaRowsToJson(const std::vector<DetectionDelta> &rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const DetectionDelta &d : rows) {
    nlohmann::ordered_json row;
    row["phone"] = d.phone;
    row["occurrences"] = d.occurrences;
    row["correct_a"] = d.correct_a;
    row["correct_b"] = d.correct_b;
    row["difference"] = d.difference;
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace

nlohmann::ordered_json DetectionToJson(const DetectionReport &report,
                                       std::size_t k) {
  nlohmann::ordered_json j;
  j["total_occurrences"] = report.total_occurrences;
  j["total_correct_a"] = report.total_correct_a;
  j["total_correct_b"] = report.total_correct_b;
  j["improved"] = report.improved;
  j["unchanged"] = report.unchanged;
  j["reduced"] = report.reduced;
  j["top"] = DeltaRowsToJson(report.Top(k));
  j["bottom"] = DeltaRowsToJson(report.Bottom(k));
  j["deltas"] = DeltaRowsToJson(report.deltas);
  return j;
}

std::string DetectionCsv(const DetectionReport &report) {
  std::string out = "phone,occurrences,correct_a,correct_b,difference\n";
  for (const DetectionDelta &d : report.deltas) {
    out += d.phone + ',' + std::to_string(d.occurrences) + ',' +
           std::to_string(d.correct_a) + ',' + std::to_string(d.correct_b) +
           ',' + std::to_string(d.difference) + '\n';
  }
  return out;
}

std::string FormatCounts(const std::string &label, const ErrorCounts &counts,
                         int precision) {
  std::string out = label + ' ';
  out += counts.ref_length > 0 ? ErrorRate(counts).ToDecimal(precision)
                               : std::string("undefined");
  out += " [ " + std::to_string(counts.errors()) + " / " +
         std::to_string(counts.ref_length) + ", " +
         std::to_string(counts.insertions) + " ins, " +
         std::to_string(counts.deletions) + " del, " +
         std::to_string(counts.substitutions) + " sub ]\n";
  return out;
}

std::string FormatPhoneStats(const PhoneStats &stats) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"phone", "occurrences", "correct", "substituted", "deleted",
                  "inserted"});
  for (const auto &[label, t] : stats.tallies()) {
    auto ins = stats.inserted().find(label);
    rows.push_back({label, std::to_string(t.occurrences),
                    std::to_string(t.correct), std::to_string(t.substituted()),
                    std::to_string(t.deleted),
                    std::to_string(ins == stats.inserted().end() ? 0
                                                                 : ins->second)});
  }
  return FormatTable(rows);
}

std::string FormatDetection(const DetectionReport &report, std::size_t k) {
  auto table = [](const std::vector<DetectionDelta> &deltas) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"phone", "occurrences", "correct_a", "correct_b",
                    "difference"});
    for (const DetectionDelta &d : deltas) {
      rows.push_back({d.phone, std::to_string(d.occurrences),
                      std::to_string(d.correct_a), std::to_string(d.correct_b),
                      std::to_string(d.difference)});
    }
    return FormatTable(rows);
  };
  std::string out;
  out += "total occurrences " + std::to_string(report.total_occurrences) +
         ", correct A " + std::to_string(report.total_correct_a) +
         ", correct B " + std::to_string(report.total_correct_b) + '\n';
  out += "improved " + std::to_string(report.improved) + ", unchanged " +
         std::to_string(report.unchanged) + ", reduced " +
         std::to_string(report.reduced) + " of " +
         std::to_string(report.deltas.size()) + " phones\n";
  out += "\ntop " + std::to_string(k) + ":\n" + table(report.Top(k));
  out += "\nbottom " + std::to_string(k) + ":\n" + table(report.Bottom(k));
  return out;
}

}  // namespace persel
