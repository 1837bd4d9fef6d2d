// preference.cc
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

#include "persel/preference.h"

#include <set>
#include <utility>

#include "persel/error.h"
#include "persel/text_table.h"

namespace persel {
namespace {

constexpr std::string_view kBallotHeader = "participant_id,cohort,pair_id,choice";

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

void AddChoice(PreferenceRow &row, Choice c) {
  switch (c) {
    case Choice::kA: ++row.count_a; break;
    case Choice::kB: ++row.count_b; break;
    case Choice::kBoth: ++row.count_both; break;
  }
}

}  // namespace

const char *CohortName(Cohort c) { return c == Cohort::kL1 ? "L1" : "L2"; }

const char *ChoiceName(Choice c) {
  switch (c) {
    case Choice::kA: return "A";
    case Choice::kB: return "B";
    case Choice::kBoth: return "Both";
  }
  return "?";
}

std::vector<Ballot> LoadBallots(std::string_view csv_text) {
  std::vector<Ballot> ballots;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (pos < csv_text.size()) {
    std::size_t end = csv_text.find('\n', pos);
    if (end == std::string_view::npos) end = csv_text.size();
    std::string_view line = csv_text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!saw_header) {
      if (line != kBallotHeader) {
        throw Error(ErrorCode::kParse,
                    "expected header \"" + std::string(kBallotHeader) + "\"",
                    line_no);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    if (f.size() != 4) {
      throw Error(ErrorCode::kParse, "expected 4 fields", line_no);
    }
    if (f[0].empty() || f[2].empty()) {
      throw Error(ErrorCode::kParse, "empty participant_id or pair_id", line_no);
    }
    Ballot b;
    b.participant_id = f[0];
    b.pair_id = f[2];
    if (f[1] == "L1") {
      b.cohort = Cohort::kL1;
    } else if (f[1] == "L2") {
      b.cohort = Cohort::kL2;
    } else {
      throw Error(ErrorCode::kParse, "unknown cohort \"" + f[1] + "\"", line_no);
    }
    if (f[3] == "A") {
      b.choice = Choice::kA;
    } else if (f[3] == "B") {
      b.choice = Choice::kB;
    } else if (f[3] == "Both") {
      b.choice = Choice::kBoth;
    } else {
      throw Error(ErrorCode::kParse, "unknown choice \"" + f[3] + "\"", line_no);
    }
    if (!seen.emplace(b.participant_id, b.pair_id).second) {
      throw Error(ErrorCode::kDuplicateBallot,
                  b.participant_id + "/" + b.pair_id, line_no);
    }
    ballots.push_back(std::move(b));
  }
  if (!saw_header) throw Error(ErrorCode::kParse, "missing header", 1);
  return ballots;
}

std::string WriteBallotsCsv(std::span<const Ballot> ballots) {
  std::string out(kBallotHeader);
  out += '\n';
  for (const Ballot &b : ballots) {
    out += b.participant_id + ',' + CohortName(b.cohort) + ',' + b.pair_id +
           ',' + ChoiceName(b.choice) + '\n';
  }
  return out;
}

Rational PreferenceRow::Percent(Choice c) const {
  const std::size_t n = c == Choice::kA   ? count_a
                        : c == Choice::kB ? count_b
                                          : count_both;
  return Rational(100 * n, ballot_count());
}

std::string PreferenceRow::PercentText(Choice c) const {
  return Percent(c).ToDecimal(1);
}

PreferenceSummary Tally(std::span<const Ballot> ballots) {
  if (ballots.empty()) throw Error(ErrorCode::kNoBallots, "no ballots");
  std::set<std::pair<std::string, std::string>> seen;
  PreferenceRow l1{"L1"}, l2{"L2"}, overall{"overall"};
  for (const Ballot &b : ballots) {
    if (!seen.emplace(b.participant_id, b.pair_id).second) {
      throw Error(ErrorCode::kDuplicateBallot, b.participant_id + "/" + b.pair_id);
    }
    AddChoice(b.cohort == Cohort::kL1 ? l1 : l2, b.choice);
    AddChoice(overall, b.choice);
  }
  PreferenceSummary summary;
  if (l1.ballot_count() > 0) summary.rows.push_back(l1);
  if (l2.ballot_count() > 0) summary.rows.push_back(l2);
  summary.rows.push_back(overall);
  return summary;
}

nlohmann::ordered_json PreferenceToJson(const PreferenceSummary &summary) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const PreferenceRow &r : summary.rows) {
    nlohmann::ordered_json j;
    j["row"] = r.label;
    j["ballot_count"] = r.ballot_count();
    j["count_A"] = r.count_a;
    j["count_B"] = r.count_b;
    j["count_Both"] = r.count_both;
    j["pct_A"] = r.PercentText(Choice::kA);
    j["pct_B"] = r.PercentText(Choice::kB);
    j["pct_Both"] = r.PercentText(Choice::kBoth);
    rows.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["rounding"] = "1 decimal, half to even";
  out["rows"] = std::move(rows);
  return out;
}

std::string FormatPreference(const PreferenceSummary &summary) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"choice"};
  for (const PreferenceRow &r : summary.rows) header.push_back(r.label);
  table.push_back(std::move(header));
  const std::pair<const char *, Choice> choices[] = {
      {"Model-A", Choice::kA}, {"Model-B", Choice::kB}, {"Both", Choice::kBoth}};
  for (const auto &[name, c] : choices) {
    std::vector<std::string> row{name};
    for (const PreferenceRow &r : summary.rows) row.push_back(r.PercentText(c));
    table.push_back(std::move(row));
  }
  std::vector<std::string> counts{"ballots"};
  for (const PreferenceRow &r : summary.rows) {
    counts.push_back(std::to_string(r.ballot_count()));
  }
  table.push_back(std::move(counts));
  std::string out = FormatTable(table);
  for (const PreferenceRow &r : summary.rows) {
    out += r.label + ' ' + r.PercentText(Choice::kA) + ' ' +
           r.PercentText(Choice::kB) + ' ' + r.PercentText(Choice::kBoth) +
           " n=" + std::to_string(r.ballot_count()) + '\n';
  }
  return out;
}

}  // namespace persel
