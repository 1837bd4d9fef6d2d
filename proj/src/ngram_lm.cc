// ngram_lm.cc
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

#include "persel/ngram_lm.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <utility>

#include "persel/error.h"

namespace persel {
namespace {

constexpr double kLogProbSlack = 1e-6;

double SafeLog10(double p) {
  if (p <= 0.0) return kLogProbZero;
  return std::max(std::log10(p), kLogProbZero);
}

std::string JoinNGram(const NGram &ngram) {
  std::string out;
  for (std::size_t i = 0; i < ngram.size(); ++i) {
    if (i > 0) out += ' ';
    out += ngram[i];
  }
  return out;
}

std::string FormatLog(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

}  // namespace

std::string Smoothing::Describe() const {
  if (kind == SmoothingKind::kWittenBell) return "witten-bell";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "add-k(%g)", k);
  return buf;
}

NGramModel::NGramModel(std::vector<std::map<NGram, NGramEntry>> levels,
                       std::string comment)
    : levels_(std::move(levels)), comment_(std::move(comment)) {
  if (levels_.empty() || levels_.front().empty()) {
    throw Error(ErrorCode::kArpaFormat, "model has no unigrams");
  }
  for (std::size_t n = 1; n <= levels_.size(); ++n) {
    const bool highest = n == levels_.size();
    for (const auto &[ngram, entry] : levels_[n - 1]) {
      if (ngram.size() != n) {
        throw Error(ErrorCode::kArpaFormat,
                    "n-gram '" + JoinNGram(ngram) + "' stored at order " +
                        std::to_string(n));
      }
      if (entry.log10_prob > kLogProbSlack) {
        throw Error(ErrorCode::kArpaFormat,
                    "positive log10 probability for '" + JoinNGram(ngram) + "'");
      }
      if (highest && entry.log10_backoff) {
        throw Error(ErrorCode::kArpaFormat,
                    "dangling back-off weight on highest-order n-gram '" +
                        JoinNGram(ngram) + "'");
      }
      if (n > 1) {
        const NGram prefix(ngram.begin(), ngram.end() - 1);
        if (levels_[n - 2].count(prefix) == 0) {
          throw Error(ErrorCode::kArpaFormat,
                      "prefix of '" + JoinNGram(ngram) + "' is not stored");
        }
      }
    }
  }
}

const std::map<NGram, NGramEntry> &NGramModel::level(int n) const {
  return levels_.at(static_cast<std::size_t>(n - 1));
}

const NGramEntry *NGramModel::Find(const NGram &ngram) const {
  if (ngram.empty() || ngram.size() > levels_.size()) return nullptr;
  const auto &lvl = levels_[ngram.size() - 1];
  auto it = lvl.find(ngram);
  return it == lvl.end() ? nullptr : &it->second;
}

std::size_t NGramModel::EntryCount() const {
  std::size_t total = 0;
  for (const auto &lvl : levels_) total += lvl.size();
  return total;
}

bool NGramModel::InVocabulary(const std::string &token) const {
  return levels_.front().count(NGram{token}) > 0;
}

std::vector<std::string> NGramModel::PredictableVocabulary() const {
  std::vector<std::string> vocab;
  for (const auto &[ngram, _] : levels_.front()) {
    if (ngram.front() != kSentenceBegin) vocab.push_back(ngram.front());
  }
  return vocab;
}

std::optional<double> NGramModel::LogProb(std::span<const std::string> history,
                                          const std::string &word) const {
  if (!InVocabulary(word)) return std::nullopt;
  const std::size_t max_ctx = levels_.size() - 1;
  if (history.size() > max_ctx) history = history.last(max_ctx);
  double backoff = 0.0;
  for (std::size_t len = history.size();; --len) {
    NGram ngram(history.end() - static_cast<std::ptrdiff_t>(len), history.end());
    ngram.push_back(word);
    if (const NGramEntry *e = Find(ngram)) return backoff + e->log10_prob;
    ngram.pop_back();
    if (const NGramEntry *ctx = Find(ngram); ctx && ctx->log10_backoff) {
      backoff += *ctx->log10_backoff;
    }
    if (len == 0) break;
  }
  // Unreachable: the word is a stored unigram.
  return std::nullopt;
}

NGramModel TrainNGram(std::span<const Utterance> corpus,
                      const TrainOptions &options) {
  if (options.order < 1) {
    throw Error(ErrorCode::kInvalidOrder,
                "order must be >= 1, got " + std::to_string(options.order));
  }
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no training utterances");
  }
  if (options.smoothing.kind == SmoothingKind::kAddK &&
      !(options.smoothing.k >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "add-k requires k >= 0");
  }
  const std::size_t order = static_cast<std::size_t>(options.order);

  // counts[n-1][ngram]: n-grams ending at a predicted position.
  std::vector<std::map<NGram, std::uint64_t>> counts(order);
  for (const Utterance &utt : corpus) {
    std::vector<std::string> tokens;
    tokens.reserve(utt.phones.size() + 2);
    tokens.emplace_back(kSentenceBegin);
    for (const Phone &p : utt.phones) {
      if (p.label() == kSentenceBegin || p.label() == kSentenceEnd) {
        throw Error(ErrorCode::kInvalidConfig,
                    "reserved marker '" + p.label() + "' in utterance " + utt.id);
      }
      tokens.push_back(p.label());
    }
    tokens.emplace_back(kSentenceEnd);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      for (std::size_t n = 1; n <= order && n <= i + 1; ++n) {
        NGram ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i + 1 - n),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + 1));
        ++counts[n - 1][ngram];
      }
    }
  }

  std::set<std::string> vocab_set;
  for (const auto &[ngram, _] : counts[0]) vocab_set.insert(ngram.front());
  for (const std::string &w : options.extra_vocabulary) {
    if (w == kSentenceBegin) continue;
    vocab_set.insert(Phone(w).label());
  }
  const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
  const double v = static_cast<double>(vocab.size());
  const bool witten_bell = options.smoothing.kind == SmoothingKind::kWittenBell;
  const double k = options.smoothing.k;

  std::vector<std::map<NGram, NGramEntry>> levels(order);

  // Unigrams: interpolated with the uniform distribution over the vocabulary.
  {
    double total = 0.0;
    for (const auto &[_, c] : counts[0]) total += static_cast<double>(c);
    const double types = static_cast<double>(counts[0].size());
    for (const std::string &w : vocab) {
      auto it = counts[0].find(NGram{w});
      const double c = it == counts[0].end() ? 0.0 : static_cast<double>(it->second);
      const double p = witten_bell ? (c + types / v) / (total + types)
                                   : (c + k) / (total + k * v);
      levels[0][NGram{w}].log10_prob = SafeLog10(p);
    }
    levels[0][NGram{kSentenceBegin}].log10_prob = kLogProbZero;
  }

  for (std::size_t n = 2; n <= order; ++n) {
    // Group n-gram counts by their (n-1)-token context.
    std::map<NGram, std::vector<std::pair<std::string, std::uint64_t>>> by_context;
    for (const auto &[ngram, c] : counts[n - 1]) {
      by_context[NGram(ngram.begin(), ngram.end() - 1)].emplace_back(ngram.back(), c);
    }
    // The lower-order model (levels 1..n-1) is complete at this point.
    NGramModel lower(std::vector<std::map<NGram, NGramEntry>>(
        levels.begin(), levels.begin() + static_cast<std::ptrdiff_t>(n - 1)));

    for (const auto &[context, followers] : by_context) {
      double c_h = 0.0;
      std::set<std::string> seen;
      for (const auto &[w, c] : followers) {
        c_h += static_cast<double>(c);
        seen.insert(w);
      }
      const double types = static_cast<double>(followers.size());
      const bool all_seen = seen.size() == vocab.size();

      double leftover;
      if (witten_bell) {
        leftover = all_seen ? 0.0 : types / (c_h + types);
      } else {
        leftover = k * (v - types) / (c_h + k * v);
      }
      for (const auto &[w, c] : followers) {
        const double cw = static_cast<double>(c);
        double p;
        if (witten_bell) {
          p = all_seen ? cw / c_h : cw / (c_h + types);
        } else {
          p = (cw + k) / (c_h + k * v);
        }
        NGram ngram = context;
        ngram.push_back(w);
        levels[n - 1][ngram].log10_prob = SafeLog10(p);
      }

      double backoff_log = 0.0;
      if (!all_seen) {
        if (leftover <= 0.0) {
          backoff_log = kLogProbZero;
        } else {
          // Mass the lower order gives to words unseen after this context.
          const std::span<const std::string> lower_ctx(context.begin() + 1,
                                                       context.end());
          double unseen_mass = 0.0;
          for (const std::string &w : vocab) {
            if (seen.count(w) > 0) continue;
            unseen_mass += std::pow(10.0, *lower.LogProb(lower_ctx, w));
          }
          backoff_log = unseen_mass > 0.0 ? std::log10(leftover / unseen_mass)
                                          : kLogProbZero;
        }
      }
      levels[n - 2].at(context).log10_backoff = backoff_log;
    }
  }

  std::string comment = "persel phone LM: order " + std::to_string(order) +
                        ", smoothing " + options.smoothing.Describe() +
                        " (not SRILM's default Good-Turing/Katz discounting)";
  return NGramModel(std::move(levels), std::move(comment));
}

NGramModel UniformUnigram(std::span<const std::string> tokens) {
  std::set<std::string> vocab;
  for (const std::string &t : tokens) {
    if (t != kSentenceBegin) vocab.insert(Phone(t).label());
  }
  vocab.insert(kSentenceEnd);
  const double lp = -std::log10(static_cast<double>(vocab.size()));
  std::vector<std::map<NGram, NGramEntry>> levels(1);
  for (const std::string &w : vocab) levels[0][NGram{w}].log10_prob = lp;
  levels[0][NGram{kSentenceBegin}].log10_prob = kLogProbZero;
  return NGramModel(std::move(levels), "persel uniform unigram");
}

PerplexityResult Perplexity(const NGramModel &model,
                            std::span<const Utterance> corpus,
                            OovPolicy policy) {
  PerplexityResult result;
  const bool has_unk = model.InVocabulary(kUnknownToken);
  const double floor_log = std::log10(kOovFloorProb);
  const std::size_t max_ctx = static_cast<std::size_t>(model.order() - 1);
  // Neumaier summation.
  double compensation = 0.0;

  for (const Utterance &utt : corpus) {
    std::vector<std::string> history{kSentenceBegin};
    auto score = [&](const std::string &token) {
      std::optional<double> lp = model.LogProb(history, token);
      const bool oov = !lp.has_value();
      if (oov && policy == OovPolicy::kMapToUnknown && has_unk) {
        lp = model.LogProb(history, kUnknownToken);
      }
      if (!lp || *lp <= kLogProbZero) {
        if (policy == OovPolicy::kStrict) {
          const std::size_t keep = std::min(history.size(), max_ctx);
          NGram ngram(history.end() - static_cast<std::ptrdiff_t>(keep),
                      history.end());
          ngram.push_back(token);
          throw Error(ErrorCode::kZeroProbability,
                      "'" + JoinNGram(ngram) + "' in utterance " + utt.id +
                          (oov ? " (out of vocabulary)" : ""));
        }
        lp = floor_log;
        if (oov) {
          ++result.oov_events;
        } else {
          ++result.floored_events;
        }
      } else if (oov) {
        ++result.oov_events;
      }
      const double t = result.log10_prob + *lp;
      compensation += std::abs(result.log10_prob) >= std::abs(*lp)
                          ? (result.log10_prob - t) + *lp
                          : (*lp - t) + result.log10_prob;
      result.log10_prob = t;
      ++result.events;
      history.push_back(token);
    };
    for (const Phone &p : utt.phones) score(p.label());
    score(kSentenceEnd);
  }
  if (result.events == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "nothing to score");
  }
  result.log10_prob += compensation;
  result.perplexity =
      std::pow(10.0, -result.log10_prob / static_cast<double>(result.events));
  return result;
}

std::string ExportArpa(const NGramModel &model) {
  std::string out;
  if (!model.comment().empty()) {
    std::size_t pos = 0;
    const std::string &c = model.comment();
    while (pos <= c.size()) {
      std::size_t end = c.find('\n', pos);
      if (end == std::string::npos) end = c.size();
      out += "# " + c.substr(pos, end - pos) + '\n';
      pos = end + 1;
    }
    out += '\n';
  }
  out += "\\data\\\n";
  for (int n = 1; n <= model.order(); ++n) {
    out += "ngram " + std::to_string(n) + "=" +
           std::to_string(model.level(n).size()) + '\n';
  }
  for (int n = 1; n <= model.order(); ++n) {
    out += "\n\\" + std::to_string(n) + "-grams:\n";
    for (const auto &[ngram, entry] : model.level(n)) {
      out += FormatLog(entry.log10_prob) + '\t' + JoinNGram(ngram);
      if (entry.log10_backoff) out += '\t' + FormatLog(*entry.log10_backoff);
      out += '\n';
    }
  }
  out += "\n\\end\\\n";
  return out;
}

namespace {

std::vector<std::string> SplitWs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

double ParseLog(const std::string &field, std::size_t line_no) {
  const char *begin = field.c_str();
  char *end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || std::isnan(v)) {
    throw Error(ErrorCode::kArpaFormat, "bad number '" + field + "'", line_no);
  }
  if (std::isinf(v)) {
    if (v > 0) {
      throw Error(ErrorCode::kArpaFormat, "infinite log value", line_no);
    }
    return kLogProbZero;
  }
  return v;
}

}  // namespace

NGramModel ImportArpa(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(pos, end - pos));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      pos = end + 1;
    }
  }

  std::size_t i = 0;
  std::string comment;
  for (; i < lines.size() && lines[i] != "\\data\\"; ++i) {
    const std::string &l = lines[i];
    if (l.rfind("# ", 0) == 0) {
      if (!comment.empty()) comment += '\n';
      comment += l.substr(2);
    }
  }
  if (i == lines.size()) {
    throw Error(ErrorCode::kArpaFormat, "missing \\data\\ header");
  }
  ++i;

  std::vector<std::size_t> declared;
  for (; i < lines.size(); ++i) {
    const std::string &l = lines[i];
    if (l.empty()) continue;
    if (l.rfind("ngram ", 0) != 0) break;
    const std::size_t eq = l.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kArpaFormat, "malformed count line", i + 1);
    }
    char *end = nullptr;
    const long n = std::strtol(l.c_str() + 6, &end, 10);
    const long count = std::strtol(l.c_str() + eq + 1, nullptr, 10);
    if (end != l.c_str() + eq || n != static_cast<long>(declared.size()) + 1 ||
        count < 0) {
      throw Error(ErrorCode::kArpaFormat, "malformed count line '" + l + "'",
                  i + 1);
    }
    declared.push_back(static_cast<std::size_t>(count));
  }
  if (declared.empty()) {
    throw Error(ErrorCode::kArpaFormat, "no ngram counts in header", i + 1);
  }

  const std::size_t order = declared.size();
  std::vector<std::map<NGram, NGramEntry>> levels(order);
  for (std::size_t n = 1; n <= order; ++n) {
    while (i < lines.size() && lines[i].empty()) ++i;
    const std::string expected = "\\" + std::to_string(n) + "-grams:";
    if (i >= lines.size() || lines[i] != expected) {
      throw Error(ErrorCode::kArpaFormat, "expected section " + expected,
                  std::min(i + 1, lines.size()));
    }
    const std::size_t header_line = i + 1;
    ++i;
    for (; i < lines.size() && !lines[i].empty() && lines[i][0] != '\\'; ++i) {
      const std::vector<std::string> fields = SplitWs(lines[i]);
      if (fields.size() != n + 1 && fields.size() != n + 2) {
        throw Error(ErrorCode::kArpaFormat,
                    "expected " + std::to_string(n) + " tokens", i + 1);
      }
      NGramEntry entry;
      entry.log10_prob = ParseLog(fields[0], i + 1);
      if (entry.log10_prob > kLogProbSlack) {
        throw Error(ErrorCode::kArpaFormat, "positive log10 probability", i + 1);
      }
      if (fields.size() == n + 2) {
        if (n == order) {
          throw Error(ErrorCode::kArpaFormat,
                      "dangling back-off weight on highest order", i + 1);
        }
        entry.log10_backoff = ParseLog(fields[n + 1], i + 1);
      }
      NGram ngram(fields.begin() + 1,
                  fields.begin() + 1 + static_cast<std::ptrdiff_t>(n));
      if (!levels[n - 1].emplace(std::move(ngram), entry).second) {
        throw Error(ErrorCode::kArpaFormat, "duplicate n-gram", i + 1);
      }
    }
    if (levels[n - 1].size() != declared[n - 1]) {
      throw Error(ErrorCode::kArpaFormat,
                  "section declares " + std::to_string(declared[n - 1]) +
                      " entries but has " +
                      std::to_string(levels[n - 1].size()),
                  header_line);
    }
  }
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i >= lines.size() || lines[i] != "\\end\\") {
    throw Error(ErrorCode::kArpaFormat, "missing \\end\\",
                std::min(i + 1, lines.size()));
  }
  return NGramModel(std::move(levels), std::move(comment));
}

}  // namespace persel
