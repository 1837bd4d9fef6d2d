// metrics_test.cc
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
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "persel/error.h"

namespace persel {
namespace {

ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

ErrorCounts Counts(std::uint64_t c, std::uint64_t s, std::uint64_t d,
                   std::uint64_t i) {
  ErrorCounts out;
  out.correct = c;
  out.substitutions = s;
  out.deletions = d;
  out.insertions = i;
  out.ref_length = c + s + d;
  return out;
}

PhoneInventory Inventory() {
  return ParseInventory("a\nk\nt\nsh\nee\nsil\tspecial\n|\tspecial\n.\tspecial\n");
}

std::vector<Utterance> Corpus(std::string_view text, CorpusRole role) {
  TranscriptOptions opts;
  opts.role = role;
  return ParseTranscripts(text, Inventory(), opts).utterances;
}

TEST(RateTest, ExactFraction) {
  const Rational r = ErrorRate(Counts(8, 1, 1, 1));
  EXPECT_EQ(r, Rational(3, 10));
  EXPECT_EQ(r.numerator(), 3u);
  EXPECT_EQ(r.denominator(), 10u);
  EXPECT_EQ(r.ToDecimal(4), "0.3000");
}

TEST(RateTest, ZeroErrorsIsExactlyZero) {
  EXPECT_EQ(ErrorRate(Counts(12, 0, 0, 0)), Rational(0, 1));
}

TEST(RateTest, InsertionsCanReachOne) {
  const Alignment a = Align(MakeSequence("a k t"), MakeSequence("a ee k sh t ee"));
  EXPECT_EQ(a.counts().correct, 3u);
  EXPECT_EQ(Per(a), Rational(1, 1));
}

TEST(RateTest, UndefinedForEmptyReference) {
  EXPECT_EQ(CodeOf([] { ErrorRate(ErrorCounts{}); }), ErrorCode::kUndefinedRate);
}

TEST(RateTest, DecimalRoundsHalfToEven) {
  EXPECT_EQ(Rational(1, 8).ToDecimal(2), "0.12");
  EXPECT_EQ(Rational(3, 8).ToDecimal(2), "0.38");
  EXPECT_EQ(Rational(5, 2).ToDecimal(0), "2");
  EXPECT_EQ(Rational(7, 2).ToDecimal(0), "4");
}

TEST(CorpusPerTest, PoolsRawCounts) {
  const PhoneSequence ref10 = MakeSequence("a k t a k t a k t a");
  PhoneSequence one_err = ref10;
  one_err[0] = Phone("sh");
  PhoneSequence three_err = ref10;
  three_err[0] = three_err[1] = three_err[2] = Phone("sh");
  const std::vector<ScoredUtterance> scored{{"u1", Align(ref10, one_err)},
                                            {"u2", Align(ref10, three_err)}};
  const ErrorRateReport r = CorpusPer(scored);
  EXPECT_EQ(r.PooledRate(), Rational(1, 5));
  EXPECT_EQ(r.per_utterance.size(), 2u);
}

TEST(CorpusPerTest, SingleUtteranceAndErrors) {
  const std::vector<ScoredUtterance> one{
      {"u1", Align(MakeSequence("a k"), MakeSequence("a"))}};
  EXPECT_EQ(CorpusPer(one).PooledRate(), Rational(1, 2));
  EXPECT_EQ(CodeOf([] { CorpusPer({}); }), ErrorCode::kEmptyCorpus);
  const std::vector<ScoredUtterance> dup{one[0], one[0]};
  EXPECT_EQ(CodeOf([&] { CorpusPer(dup); }), ErrorCode::kDuplicateUtterance);
}

TEST(ScoreCorpusTest, DefaultFilterDropsSilenceAndBoundary) {
  const auto refs = Corpus("u1 sil a k | t sil\n", CorpusRole::kReference);
  const auto hyps = Corpus("u1 a k t\n", CorpusRole::kHypothesis);
  const auto scored = ScoreCorpus(refs, hyps, ScoringFilter::Default());
  EXPECT_EQ(CorpusPer(scored).PooledRate(), Rational(0, 3));
  const auto all = ScoreCorpus(refs, hyps, ScoringFilter::AllTokens());
  EXPECT_EQ(CorpusPer(all).pooled.deletions, 3u);
  EXPECT_EQ(ScoringFilter::Default().Describe(), "exclude {sil, |}");
  EXPECT_EQ(ScoringFilter::AllTokens().Describe(), "score all tokens");
}

TEST(ScoreCorpusTest, PhonesOnlyDropsPunctuation) {
  const auto refs = Corpus("u1 a k . t\n", CorpusRole::kReference);
  const auto hyps = Corpus("u1 a k t\n", CorpusRole::kHypothesis);
  const auto scored = ScoreCorpus(refs, hyps, ScoringFilter::PhonesOnly(Inventory()));
  EXPECT_EQ(CorpusPer(scored).pooled.errors(), 0u);
}

TEST(ScoreCorpusTest, MissingHypothesisIsAllDeletions) {
  const auto refs = Corpus("u1 a k\nu2 t t sh\n", CorpusRole::kReference);
  const auto hyps = Corpus("u1 a k\n", CorpusRole::kHypothesis);
  const ErrorRateReport r = CorpusPer(ScoreCorpus(refs, hyps, ScoringFilter::Default()));
  EXPECT_EQ(r.per_utterance.at("u2").deletions, 3u);
  EXPECT_EQ(r.pooled.ref_length, 5u);
}

TEST(ScoreCorpusTest, ExtraHypothesisIsIdMismatch) {
  const auto refs = Corpus("u1 a k\n", CorpusRole::kReference);
  const auto hyps = Corpus("u1 a k\nu9 t\n", CorpusRole::kHypothesis);
  EXPECT_EQ(CodeOf([&] { ScoreCorpus(refs, hyps, ScoringFilter::Default()); }),
            ErrorCode::kIdMismatch);
}

TEST(ScoreCorpusTest, FilterEmptyingReferenceIsError) {
  const auto refs = Corpus("u1 sil |\n", CorpusRole::kReference);
  EXPECT_EQ(CodeOf([&] { ScoreCorpus(refs, {}, ScoringFilter::Default()); }),
            ErrorCode::kEmptyReference);
}

TEST(ScoreCorpusTest, ThreadCountDoesNotChangeResult) {
  std::mt19937 rng(4);
  const std::vector<std::string> alphabet{"a", "k", "t", "sh", "ee"};
  std::string ref_text, hyp_text;
  for (int u = 0; u < 200; ++u) {
    ref_text += "u" + std::to_string(u);
    hyp_text += "u" + std::to_string(u);
    for (int k = 0; k < 15; ++k) ref_text += " " + alphabet[rng() % 5];
    for (int k = 0; k < 13; ++k) hyp_text += " " + alphabet[rng() % 5];
    ref_text += "\n";
    hyp_text += "\n";
  }
  const auto refs = Corpus(ref_text, CorpusRole::kReference);
  const auto hyps = Corpus(hyp_text, CorpusRole::kHypothesis);
  const auto serial = ScoreCorpus(refs, hyps, ScoringFilter::Default(), 1);
  const auto parallel = ScoreCorpus(refs, hyps, ScoringFilter::Default(), 8);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].alignment.ops(), parallel[i].alignment.ops());
  }
}

TEST(CorpusPerTest, PermutationInvariantAndBetweenExtremes) {
  std::mt19937 rng(8);
  const std::vector<std::string> alphabet{"a", "k", "t"};
  std::vector<ScoredUtterance> scored;
  for (int u = 0; u < 40; ++u) {
    PhoneSequence ref, hyp;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 12); k < n; ++k) {
      ref.emplace_back(alphabet[rng() % 3]);
    }
    for (int k = 0, n = static_cast<int>(rng() % 12); k < n; ++k) {
      hyp.emplace_back(alphabet[rng() % 3]);
    }
    scored.push_back({"u" + std::to_string(u), Align(ref, hyp)});
  }
  const Rational pooled = CorpusPer(scored).PooledRate();
  Rational lo = Per(scored[0].alignment), hi = lo;
  for (const auto &s : scored) {
    lo = std::min(lo, Per(s.alignment));
    hi = std::max(hi, Per(s.alignment));
  }
  EXPECT_LE(lo, pooled);
  EXPECT_LE(pooled, hi);
  std::shuffle(scored.begin(), scored.end(), rng);
  EXPECT_EQ(CorpusPer(scored).PooledRate(), pooled);
}

TEST(WerTest, IdentityAndDeletedWord) {
  const Phone bar("|");
  EXPECT_EQ(WordErrorRate(MakeSequence("a k | a"), MakeSequence("a k | a"), bar),
            Rational(0, 2));
  EXPECT_EQ(WordErrorRate(MakeSequence("a k | t"), MakeSequence("a k"), bar),
            Rational(1, 2));
  EXPECT_EQ(CodeOf([&] { WordErrorRate(MakeSequence("| |"), {}, bar); }),
            ErrorCode::kUndefinedRate);
}

TEST(WerTest, WordsAreNotJoinedStrings) {
  // "a k" vs "ak" would collide if words were compared as joined text.
  const Phone bar("|");
  EXPECT_EQ(WordErrorRate(MakeSequence("a k"), MakeSequence("ak"), bar),
            Rational(1, 1));
}

TEST(WerTest, MatchesOracleOnWordLists) {
  std::mt19937 rng(21);
  const std::vector<std::string> alphabet{"a", "k", "|"};
  const Phone bar("|");
  for (int trial = 0; trial < 200; ++trial) {
    PhoneSequence ref, hyp;
    for (int k = 0, n = 2 + static_cast<int>(rng() % 10); k < n; ++k) {
      ref.emplace_back(alphabet[rng() % 3]);
    }
    for (int k = 0, n = static_cast<int>(rng() % 10); k < n; ++k) {
      hyp.emplace_back(alphabet[rng() % 3]);
    }
    auto words = [&](const PhoneSequence &s) {
      oracle::Tokens out;
      for (const PhoneSequence &w : SplitWords(s, bar)) out.push_back(JoinLabels(w));
      return out;
    };
    const oracle::Tokens rw = words(ref), hw = words(hyp);
    const ErrorCounts c = WordErrorCounts(ref, hyp, bar);
    EXPECT_EQ(c.ref_length, rw.size());
    EXPECT_EQ(c.errors(), oracle::MemoEditDistance(rw, hw));
  }
}

TEST(WerTest, CorpusWordErrorsPools) {
  const auto refs = Corpus("u1 a k | t\nu2 sh | ee\n", CorpusRole::kReference);
  const auto hyps = Corpus("u1 a k | t\nu2 sh\n", CorpusRole::kHypothesis);
  const ErrorCounts c =
      CorpusWordErrors(refs, hyps, ScoringFilter::Default(), Phone("|"));
  EXPECT_EQ(c.ref_length, 4u);
  EXPECT_EQ(c.errors(), 1u);
}

TEST(PhoneStatsTest, DirectTally) {
  const Alignment a({{EditOp::kMatch, Phone("a"), Phone("a")},
                     {EditOp::kSubstitute, Phone("k"), Phone("t")},
                     {EditOp::kDelete, Phone("a"), std::nullopt}});
  const std::vector<Alignment> all{a};
  const PhoneStats s = ComputePhoneStats(all);
  const PhoneTally &ta = s.tallies().at("a");
  EXPECT_EQ(ta.occurrences, 2u);
  EXPECT_EQ(ta.correct, 1u);
  EXPECT_EQ(ta.deleted, 1u);
  const PhoneTally &tk = s.tallies().at("k");
  EXPECT_EQ(tk.occurrences, 1u);
  EXPECT_EQ(tk.substituted_as.at("t"), 1u);
  EXPECT_EQ(tk.correct, 0u);
}

TEST(PhoneStatsTest, IdentityCorpusAllCorrect) {
  const auto refs = Corpus("u1 a k a t\nu2 sh ee\n", CorpusRole::kReference);
  const PhoneStats s =
      ComputePhoneStats(ScoreCorpus(refs, refs, ScoringFilter::Default()));
  for (const auto &[label, t] : s.tallies()) EXPECT_EQ(t.correct, t.occurrences);
}

TEST(PhoneStatsTest, ConservationOnRandomCorpora) {
  std::mt19937 rng(2);
  const std::vector<std::string> alphabet{"a", "k", "t", "sh", "ee"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScoredUtterance> scored;
    for (int u = 0; u < 15; ++u) {
      PhoneSequence ref, hyp;
      for (int k = 0, n = 1 + static_cast<int>(rng() % 10); k < n; ++k) {
        ref.emplace_back(alphabet[rng() % 5]);
      }
      for (int k = 0, n = static_cast<int>(rng() % 10); k < n; ++k) {
        hyp.emplace_back(alphabet[rng() % 5]);
      }
      scored.push_back({"u" + std::to_string(u), Align(ref, hyp)});
    }
    const ErrorRateReport r = CorpusPer(scored);
    const PhoneStats s = ComputePhoneStats(scored);
    std::uint64_t sum = 0, ins = 0;
    for (const auto &[label, t] : s.tallies()) {
      EXPECT_EQ(t.correct + t.substituted() + t.deleted, t.occurrences);
      sum += t.occurrences;
    }
    for (const auto &[label, n] : s.inserted()) ins += n;
    EXPECT_EQ(sum, r.pooled.ref_length);
    EXPECT_EQ(ins, r.pooled.insertions);
  }
}

// Builds stats in which `phone` occurs `occ` times and `correct` of them
// align as matches; the rest are deleted.
void AddPhone(std::vector<Alignment> &out, const std::string &phone,
              std::uint64_t occ, std::uint64_t correct) {
  std::vector<AlignmentOp> ops;
  for (std::uint64_t i = 0; i < occ; ++i) {
    if (i < correct) {
      ops.push_back({EditOp::kMatch, Phone(phone), Phone(phone)});
    } else {
      ops.push_back({EditOp::kDelete, Phone(phone), std::nullopt});
    }
  }
  out.emplace_back(std::move(ops));
}

struct TableRow {
  const char *phone;
  std::uint64_t occ, correct_a, correct_b;
};

// Ten rows of a two-model phone detection comparison.
constexpr TableRow kTableRows[] = {
    {"a", 1784, 1395, 1460}, {"ee", 1407, 1203, 1261}, {"i", 717, 464, 498},
    {"k", 1217, 1061, 1095}, {"h", 676, 497, 528},     {"z", 55, 42, 40},
    {"uu", 131, 97, 94},     {"gh", 33, 31, 27},       {"sh", 123, 99, 95},
    {"q", 633, 145, 137},
};

TEST(DetectionTest, TenRowFixtureRankAndSummarize) {
  std::vector<Alignment> a, b;
  for (const TableRow &r : kTableRows) {
    AddPhone(a, r.phone, r.occ, r.correct_a);
    AddPhone(b, r.phone, r.occ, r.correct_b);
  }
  const DetectionReport rep =
      CompareDetection(ComputePhoneStats(a), ComputePhoneStats(b));
  ASSERT_EQ(rep.deltas.size(), 10u);
  EXPECT_EQ(rep.deltas[0].phone, "a");
  EXPECT_EQ(rep.deltas[0].occurrences, 1784u);
  EXPECT_EQ(rep.deltas[0].correct_a, 1395u);
  EXPECT_EQ(rep.deltas[0].correct_b, 1460u);
  EXPECT_EQ(rep.deltas[0].difference, 65);
  std::vector<std::string> top, bottom;
  for (const auto &d : rep.Top(5)) top.push_back(d.phone);
  for (const auto &d : rep.Bottom(5)) bottom.push_back(d.phone);
  // Equal differences order by occurrences: k (1217) before i (717),
  // sh (123) before gh (33).
  EXPECT_EQ(top, (std::vector<std::string>{"a", "ee", "k", "i", "h"}));
  EXPECT_EQ(bottom, (std::vector<std::string>{"z", "uu", "sh", "gh", "q"}));
  EXPECT_EQ(rep.improved, 5u);
  EXPECT_EQ(rep.reduced, 5u);
  EXPECT_EQ(rep.unchanged, 0u);
  EXPECT_EQ(rep.improved + rep.unchanged + rep.reduced, rep.deltas.size());
}

TEST(DetectionTest, IdenticalModels) {
  std::vector<Alignment> a;
  for (const TableRow &r : kTableRows) AddPhone(a, r.phone, r.occ, r.correct_a);
  const PhoneStats s = ComputePhoneStats(a);
  const DetectionReport rep = CompareDetection(s, s);
  EXPECT_EQ(rep.improved, 0u);
  EXPECT_EQ(rep.reduced, 0u);
  EXPECT_EQ(rep.unchanged, 10u);
  for (const auto &d : rep.deltas) EXPECT_EQ(d.difference, 0);
}

TEST(DetectionTest, ReferenceMismatch) {
  std::vector<Alignment> a, b;
  AddPhone(a, "a", 10, 5);
  AddPhone(b, "a", 11, 5);
  EXPECT_EQ(CodeOf([&] { CompareDetection(ComputePhoneStats(a), ComputePhoneStats(b)); }),
            ErrorCode::kReferenceMismatch);
}

TEST(DetectionTest, HandTalliedTwoModelFixture) {
  const auto refs = Corpus("u1 a k t a\nu2 sh ee a\n", CorpusRole::kReference);
  const auto hyp_a = Corpus("u1 a t t\nu2 sh a\n", CorpusRole::kHypothesis);
  const auto hyp_b = Corpus("u1 a k t a\nu2 ee ee a\n", CorpusRole::kHypothesis);
  const ScoringFilter f = ScoringFilter::Default();
  const DetectionReport rep =
      CompareDetection(ComputePhoneStats(ScoreCorpus(refs, hyp_a, f)),
                       ComputePhoneStats(ScoreCorpus(refs, hyp_b, f)));
  // Model A: a 2 of 3, k 0, t 1, sh 1, ee 0.
  // Model B: everything correct except sh (substituted by ee).
  std::map<std::string, std::int64_t> diff;
  for (const auto &d : rep.deltas) diff[d.phone] = d.difference;
  EXPECT_EQ(diff.at("a"), 1);
  EXPECT_EQ(diff.at("k"), 1);
  EXPECT_EQ(diff.at("t"), 0);
  EXPECT_EQ(diff.at("sh"), -1);
  EXPECT_EQ(diff.at("ee"), 1);
  EXPECT_EQ(rep.total_correct_b - rep.total_correct_a, 2u);
}

TEST(SerializationTest, CsvHeaderAndJsonFields) {
  std::vector<Alignment> a, b;
  AddPhone(a, "a", 4, 2);
  AddPhone(b, "a", 4, 3);
  const DetectionReport rep =
      CompareDetection(ComputePhoneStats(a), ComputePhoneStats(b));
  EXPECT_EQ(DetectionCsv(rep),
            "phone,occurrences,correct_a,correct_b,difference\na,4,2,3,1\n");
  const auto j = RateToJson(Rational(1, 3), 4);
  EXPECT_EQ(j["numerator"], 1);
  EXPECT_EQ(j["denominator"], 3);
  EXPECT_EQ(j["decimal"], "0.3333");
  EXPECT_EQ(FormatCounts("PER", Counts(7, 1, 2, 1), 4),
            "PER 0.4000 [ 4 / 10, 1 ins, 2 del, 1 sub ]\n");
}

}  // namespace
}  // namespace persel
