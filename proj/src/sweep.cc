// sweep.cc
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

#include "persel/sweep.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "persel/parallel.h"
#include "persel/text_table.h"

namespace persel {
namespace {

// Absorbs binary rounding when a PER sits exactly on the tolerance band.
constexpr double kToleranceSlack = 1e-12;

std::string EpochTag(Epoch e) { return "epoch " + std::to_string(e); }

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<CheckpointRecord> LoadManifest(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kParse, "manifest must be a JSON array");
  }
  std::vector<CheckpointRecord> records;
  std::set<Epoch> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const nlohmann::json &item = doc[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!item.is_object()) throw Error(ErrorCode::kParse, where + " is not an object");
    if (!item.contains("epoch") || !item["epoch"].is_number_integer()) {
      throw Error(ErrorCode::kParse, where + ": integer 'epoch' required");
    }
    if (!item.contains("hypothesis_path") || !item["hypothesis_path"].is_string()) {
      throw Error(ErrorCode::kParse, where + ": string 'hypothesis_path' required");
    }
    const auto epoch = item["epoch"].get<std::int64_t>();
    if (epoch <= 0 || epoch > INT32_MAX) {
      throw Error(ErrorCode::kInvalidEpoch, std::to_string(epoch));
    }
    CheckpointRecord rec;
    rec.epoch = static_cast<Epoch>(epoch);
    rec.hypothesis_path = item["hypothesis_path"].get<std::string>();
    if (item.contains("validation_loss") && !item["validation_loss"].is_null()) {
      const nlohmann::json &loss = item["validation_loss"];
      if (!loss.is_number()) {
        throw Error(ErrorCode::kParse, where + ": 'validation_loss' must be a number");
      }
      const double v = loss.get<double>();
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::kParse,
                    where + ": 'validation_loss' must be finite and >= 0");
      }
      rec.validation_loss = v;
    }
    if (!seen.insert(rec.epoch).second) {
      throw Error(ErrorCode::kDuplicateEpoch, std::to_string(rec.epoch));
    }
    records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(),
            [](const auto &a, const auto &b) { return a.epoch < b.epoch; });
  return records;
}

std::string SerializeManifest(std::span<const CheckpointRecord> records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CheckpointRecord &r : records) {
    nlohmann::ordered_json item;
    item["epoch"] = r.epoch;
    item["hypothesis_path"] = r.hypothesis_path;
    if (r.validation_loss) item["validation_loss"] = *r.validation_loss;
    arr.push_back(std::move(item));
  }
  return arr.dump(2) + '\n';
}

bool SweepSchedule::Includes(Epoch epoch) const {
  if (stride <= 0) return epoch == start_epoch;
  return epoch >= start_epoch && (epoch - start_epoch) % stride == 0;
}

std::string SweepSchedule::Describe() const {
  return "start " + std::to_string(start_epoch) + ", stride " +
         std::to_string(stride);
}

HypothesisLoader FileHypothesisLoader(std::string base_dir) {
  return [base_dir = std::move(base_dir)](const CheckpointRecord &rec) {
    std::filesystem::path path(rec.hypothesis_path);
    if (path.is_relative() && !base_dir.empty()) {
      path = std::filesystem::path(base_dir) / path;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorCode::kIo,
                  EpochTag(rec.epoch) + ": cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
      throw Error(ErrorCode::kIo,
                  EpochTag(rec.epoch) + ": read failed for " + path.string());
    }
    return buf.str();
  };
}

SweepReport EvaluateSweep(std::span<const CheckpointRecord> manifest,
                          std::span<const Utterance> reference,
                          const PhoneInventory &inventory,
                          const SweepOptions &options,
                          const HypothesisLoader &loader) {
  if (options.schedule.stride <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "schedule stride must be positive");
  }
  if (!(options.convergence_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "convergence tolerance must be > 0");
  }
  std::vector<CheckpointRecord> records(manifest.begin(), manifest.end());
  std::sort(records.begin(), records.end(),
            [](const auto &a, const auto &b) { return a.epoch < b.epoch; });

  SweepReport report;
  report.schedule = options.schedule;
  report.convergence_tolerance = options.convergence_tolerance;
  report.scoring_config =
      options.filter.Describe() +
      "; tie-break Match > Substitute > Delete > Insert; pooled counts; "
      "missing decodes scored as empty";

  std::vector<const CheckpointRecord *> scheduled;
  for (const CheckpointRecord &r : records) {
    if (options.schedule.Includes(r.epoch)) {
      scheduled.push_back(&r);
    } else {
      report.skipped_epochs.push_back(r.epoch);
    }
  }

  std::vector<CurvePoint> points(scheduled.size());
  ParallelFor(scheduled.size(), options.threads, [&](std::size_t i) {
    const CheckpointRecord &rec = *scheduled[i];
    const std::string text = loader(rec);
    try {
      TranscriptOptions topts;
      topts.role = CorpusRole::kHypothesis;
      topts.strict = options.strict;
      const TranscriptCorpus hyp = ParseTranscripts(text, inventory, topts);
      const std::vector<ScoredUtterance> scored =
          ScoreCorpus(reference, hyp.utterances, options.filter, 1);
      points[i].epoch = rec.epoch;
      points[i].counts = CorpusPer(scored).pooled;
      points[i].loss = rec.validation_loss;
    } catch (const Error &e) {
      throw Error(e.code(), EpochTag(rec.epoch) + ": " + e.message(), e.line());
    }
  });
  report.points = std::move(points);

  if (!report.points.empty()) report.selected_by_per = SelectBestPer(report);
  const bool any_loss = std::any_of(
      records.begin(), records.end(),
      [](const CheckpointRecord &r) { return r.validation_loss.has_value(); });
  if (any_loss) report.selected_by_loss = SelectBestLoss(records);
  if (options.baseline_per) {
    report.baseline_per = options.baseline_per;
    report.converged_at = ConvergenceCheck(report, *options.baseline_per,
                                           options.convergence_tolerance);
  }
  return report;
}

Epoch SelectBestPer(const SweepReport &report) {
  if (report.points.empty()) {
    throw Error(ErrorCode::kEmptySweep, "no evaluated checkpoints");
  }
  std::vector<std::pair<Epoch, Rational>> values;
  values.reserve(report.points.size());
  for (const CurvePoint &p : report.points) values.emplace_back(p.epoch, p.per());
  return *ArgminEpoch<Rational>(values);
}

Epoch SelectBestLoss(std::span<const CheckpointRecord> manifest) {
  std::vector<std::pair<Epoch, double>> values;
  for (const CheckpointRecord &r : manifest) {
    if (r.validation_loss) values.emplace_back(r.epoch, *r.validation_loss);
  }
  const std::optional<Epoch> best = ArgminEpoch<double>(values);
  if (!best) throw Error(ErrorCode::kNoLossData, "no record carries a loss");
  return *best;
}

std::optional<Epoch> ConvergenceCheck(const SweepReport &report,
                                      double baseline_per, double tolerance) {
  if (!(baseline_per >= 0.0) || !(tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig,
                "baseline must be >= 0 and tolerance > 0");
  }
  for (const CurvePoint &p : report.points) {
    if (std::fabs(p.per().ToDouble() - baseline_per) <=
        tolerance + kToleranceSlack) {
      return p.epoch;
    }
  }
  return std::nullopt;
}

CurveData EmitCurve(const SweepReport &report, int precision) {
  CurveData out;
  out.csv = "epoch,per,loss\n";
  for (const CurvePoint &p : report.points) {
    out.csv += std::to_string(p.epoch) + ',' + FormatDouble(p.per().ToDouble()) +
               ',' + (p.loss ? FormatDouble(*p.loss) : std::string()) + '\n';
  }
  out.json = SweepReportToJson(report, precision).dump(2) + '\n';
  return out;
}

std::vector<ParsedCurvePoint> ParseCurveCsv(std::string_view csv) {
  std::vector<ParsedCurvePoint> points;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto parse_double = [&](const std::string &s) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') {
      throw Error(ErrorCode::kParse, "bad number '" + s + "'", line_no);
    }
    return v;
  };
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    const std::string line(csv.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "epoch,per,loss") {
        throw Error(ErrorCode::kParse, "unexpected curve header", line_no);
      }
      continue;
    }
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw Error(ErrorCode::kParse, "expected 3 columns", line_no);
    }
    ParsedCurvePoint p;
    p.epoch = static_cast<Epoch>(parse_double(line.substr(0, c1)));
    p.per = parse_double(line.substr(c1 + 1, c2 - c1 - 1));
    const std::string loss = line.substr(c2 + 1);
    if (!loss.empty()) p.loss = parse_double(loss);
    points.push_back(p);
  }
  return points;
}

nlohmann::ordered_json SweepReportToJson(const SweepReport &report,
                                         int precision) {
  auto opt_epoch = [](const std::optional<Epoch> &e) {
    return e ? nlohmann::ordered_json(*e) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["scoring_config"] = report.scoring_config;
  j["schedule"] = {{"start_epoch", report.schedule.start_epoch},
                   {"stride", report.schedule.stride}};
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const CurvePoint &p : report.points) {
    nlohmann::ordered_json item;
    item["epoch"] = p.epoch;
    item["per"] = RateToJson(p.per(), precision);
    item["S"] = p.counts.substitutions;
    item["D"] = p.counts.deletions;
    item["I"] = p.counts.insertions;
    item["N"] = p.counts.ref_length;
    item["loss"] = p.loss ? nlohmann::ordered_json(*p.loss)
                          : nlohmann::ordered_json(nullptr);
    points.push_back(std::move(item));
  }
  j["points"] = std::move(points);
  j["skipped_epochs"] = report.skipped_epochs;
  j["selected_by_per"] = opt_epoch(report.selected_by_per);
  j["selected_by_loss"] = opt_epoch(report.selected_by_loss);
  j["baseline_per"] = report.baseline_per
                          ? nlohmann::ordered_json(*report.baseline_per)
                          : nlohmann::ordered_json(nullptr);
  j["convergence_tolerance"] = report.convergence_tolerance;
  j["converged_at"] = opt_epoch(report.converged_at);
  return j;
}

std::string FormatSweepReport(const SweepReport &report, int precision) {
  auto opt = [](const std::optional<Epoch> &e) {
    return e ? std::to_string(*e) : std::string("none");
  };
  std::string out;
  out += "scoring: " + report.scoring_config + '\n';
  out += "schedule: " + report.schedule.Describe() + '\n';
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"epoch", "per", "errors", "N", "loss"});
  for (const CurvePoint &p : report.points) {
    rows.push_back({std::to_string(p.epoch), p.per().ToDecimal(precision),
                    std::to_string(p.counts.errors()),
                    std::to_string(p.counts.ref_length),
                    p.loss ? FormatDouble(*p.loss) : std::string("-")});
  }
  out += FormatTable(rows);
  if (!report.skipped_epochs.empty()) {
    out += "skipped:";
    for (Epoch e : report.skipped_epochs) out += ' ' + std::to_string(e);
    out += '\n';
  }
  out += "selected_by_per=" + opt(report.selected_by_per) + '\n';
  out += "selected_by_loss=" + opt(report.selected_by_loss) + '\n';
  if (report.baseline_per) {
    out += "baseline_per=" + FormatDouble(*report.baseline_per) +
           " tolerance=" + FormatDouble(report.convergence_tolerance) + '\n';
    out += "converged_at=" + opt(report.converged_at) + '\n';
  }
  return out;
}

}  // namespace persel
