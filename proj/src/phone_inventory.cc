// phone_inventory.cc
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

#include "persel/phone_inventory.h"

#include <unordered_set>
#include <utility>

#include "persel/error.h"

namespace persel {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool IsSeparator(char c) { return c == ' ' || c == '\t'; }

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSeparator(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !IsSeparator(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

// Calls fn(line_number, line) for each LF-terminated line, minus any CR.
template <typename Fn>
void ForEachLine(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    pos = end + 1;
  }
}

bool IsBlank(std::string_view line) {
  for (char c : line) {
    if (!IsSeparator(c)) return false;
  }
  return true;
}

Phone PhoneAt(std::string_view label, std::size_t line_no) {
  try {
    return Phone(std::string(label));
  } catch (const Error &e) {
    throw Error(e.code(), "invalid token '" + std::string(label) + "'",
                line_no);
  }
}

}  // namespace

Phone::Phone(std::string label) : label_(std::move(label)) {
  if (label_.empty()) {
    throw Error(ErrorCode::kInvalidPhone, "empty phone label");
  }
  for (char c : label_) {
    if (IsSpace(c)) {
      throw Error(ErrorCode::kInvalidPhone,
                  "phone label contains whitespace: '" + label_ + "'");
    }
  }
}

PhoneSequence MakeSequence(std::string_view text) {
  PhoneSequence seq;
  for (std::string_view tok : SplitFields(text)) seq.emplace_back(std::string(tok));
  return seq;
}

std::string JoinLabels(std::span<const Phone> seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) out += ' ';
    out += seq[i].label();
  }
  return out;
}

PhoneInventory::PhoneInventory(std::vector<Phone> phones,
                               std::vector<Phone> specials) {
  for (auto &p : phones) {
    if (!phones_.insert(p).second) {
      throw Error(ErrorCode::kDuplicatePhone, p.label());
    }
  }
  for (auto &p : specials) {
    if (phones_.count(p) > 0 || !specials_.insert(p).second) {
      throw Error(ErrorCode::kDuplicatePhone, p.label());
    }
  }
  if (phones_.empty()) {
    throw Error(ErrorCode::kEmptyInventory, "inventory has no phones");
  }
}

bool PhoneInventory::Contains(const Phone &p) const {
  return phones_.count(p) > 0 || specials_.count(p) > 0;
}

PhoneInventory ParseInventory(std::string_view text) {
  std::vector<Phone> phones;
  std::vector<Phone> specials;
  std::unordered_set<std::string> seen;
  ForEachLine(text, [&](std::size_t line_no, std::string_view line) {
    if (IsBlank(line) || line.front() == '#') return;
    std::string_view token = line;
    bool special = false;
    if (const std::size_t tab = line.find('\t'); tab != std::string_view::npos) {
      token = line.substr(0, tab);
      const std::string_view tag = line.substr(tab + 1);
      if (tag != "special") {
        throw Error(ErrorCode::kParse,
                    "unknown class tag '" + std::string(tag) + "'", line_no);
      }
      special = true;
    }
    Phone phone = PhoneAt(token, line_no);
    if (!seen.insert(phone.label()).second) {
      throw Error(ErrorCode::kDuplicatePhone, phone.label(), line_no);
    }
    (special ? specials : phones).push_back(std::move(phone));
  });
  if (phones.empty()) {
    throw Error(ErrorCode::kEmptyInventory, "no phones in inventory file");
  }
  return PhoneInventory(std::move(phones), std::move(specials));
}

TranscriptCorpus ParseTranscripts(std::string_view text,
                                  const PhoneInventory &inventory,
                                  const TranscriptOptions &options) {
  TranscriptCorpus corpus;
  std::unordered_set<std::string> ids;
  ForEachLine(text, [&](std::size_t line_no, std::string_view line) {
    if (IsBlank(line) || line.front() == '#') return;
    const std::vector<std::string_view> fields = SplitFields(line);
    Utterance utt;
    utt.id = std::string(fields.front());
    if (!ids.insert(utt.id).second) {
      throw Error(ErrorCode::kDuplicateUtterance, utt.id, line_no);
    }
    utt.phones.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      Phone phone = PhoneAt(fields[i], line_no);
      if (!inventory.Contains(phone)) {
        if (options.strict) {
          throw Error(ErrorCode::kUnknownPhone,
                      "'" + phone.label() + "' in utterance " + utt.id,
                      line_no);
        }
        ++corpus.unknown_tokens[phone.label()];
      }
      utt.phones.push_back(std::move(phone));
    }
    if (utt.phones.empty() && options.role == CorpusRole::kReference) {
      throw Error(ErrorCode::kEmptyReference, utt.id, line_no);
    }
    corpus.utterances.push_back(std::move(utt));
  });
  return corpus;
}

std::string SerializeTranscripts(std::span<const Utterance> utterances) {
  std::string out;
  for (const Utterance &utt : utterances) {
    out += utt.id;
    for (const Phone &p : utt.phones) {
      out += ' ';
      out += p.label();
    }
    out += '\n';
  }
  return out;
}

CoverageSummary CoverageReport(std::span<const Utterance> corpus,
                               const PhoneInventory &inventory) {
  CoverageSummary summary;
  summary.inventory_size = inventory.size();
  for (const Utterance &utt : corpus) {
    for (const Phone &p : utt.phones) {
      ++summary.per_phone_counts[p.label()];
      ++summary.total_phone_occurrences;
    }
  }
  for (const Phone &p : inventory.phones()) {
    if (summary.per_phone_counts.count(p.label()) > 0) {
      ++summary.unique_phones_present;
    } else {
      summary.missing_phones.push_back(p.label());
    }
  }
  return summary;
}

}  // namespace persel
