// preference.h
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
// Pairwise listening-test ballots: each rater hears recordings from model A
// and model B and picks one, or "Both" when equally intelligible.

#ifndef PERSEL_PREFERENCE_H_
#define PERSEL_PREFERENCE_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "persel/rational.h"

namespace persel {

enum class Cohort { kL1, kL2 };
enum class Choice { kA, kB, kBoth };

const char *CohortName(Cohort c);
const char *ChoiceName(Choice c);

struct Ballot {
  std::string participant_id;
  Cohort cohort = Cohort::kL1;
  std::string pair_id;
  Choice choice = Choice::kA;

  friend bool operator==(const Ballot &, const Ballot &) = default;
};

// CSV with header "participant_id,cohort,pair_id,choice". Order preserved.
// Errors carry the line number: Error(kParse) for malformed rows or tokens,
// Error(kDuplicateBallot) for a repeated (participant_id, pair_id).
std::vector<Ballot> LoadBallots(std::string_view csv_text);
std::string WriteBallotsCsv(std::span<const Ballot> ballots);

struct PreferenceRow {
  std::string label;  // "L1", "L2" or "overall"
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::size_t count_both = 0;

  std::size_t ballot_count() const { return count_a + count_b + count_both; }
  // 100 * count / ballot_count, exact.
  Rational Percent(Choice c) const;
  // One decimal, half to even.
  std::string PercentText(Choice c) const;
};

struct PreferenceSummary {
  // Cohorts with at least one ballot, L1 before L2, then the pooled row.
  std::vector<PreferenceRow> rows;

  const PreferenceRow &overall() const { return rows.back(); }
};

// Throws Error(kNoBallots) or Error(kDuplicateBallot).
PreferenceSummary Tally(std::span<const Ballot> ballots);

nlohmann::ordered_json PreferenceToJson(const PreferenceSummary &summary);
// Choices as rows, cohorts as columns, then one line per cohort row.
std::string FormatPreference(const PreferenceSummary &summary);

}  // namespace persel

#endif  // PERSEL_PREFERENCE_H_
