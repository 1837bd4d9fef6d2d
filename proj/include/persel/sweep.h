// sweep.h
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
// Checkpoint sweeps: score every scheduled checkpoint's decodes against the
// reference, then pick a checkpoint by least PER or by least validation
// loss. Validation loss is an opaque scalar supplied by the training run.

#ifndef PERSEL_SWEEP_H_
#define PERSEL_SWEEP_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "persel/alignment.h"
#include "persel/error.h"
#include "persel/metrics.h"
#include "persel/phone_inventory.h"
#include "persel/rational.h"

namespace persel {

using Epoch = int;

inline constexpr Epoch kDefaultStartEpoch = 50;
inline constexpr int kDefaultStride = 10;
inline constexpr double kDefaultConvergenceTolerance = 0.005;

struct CheckpointRecord {
  Epoch epoch = 0;
  std::string hypothesis_path;
  std::optional<double> validation_loss;

  friend bool operator==(const CheckpointRecord &,
                         const CheckpointRecord &) = default;
};

// JSON array of {epoch, hypothesis_path, validation_loss?}. Returns records
// sorted by epoch. Throws Error(kDuplicateEpoch), Error(kInvalidEpoch) or
// Error(kParse).
std::vector<CheckpointRecord> LoadManifest(std::string_view json_text);
std::string SerializeManifest(std::span<const CheckpointRecord> records);

struct SweepSchedule {
  Epoch start_epoch = kDefaultStartEpoch;
  int stride = kDefaultStride;

  // Epochs start, start + stride, start + 2 * stride, ...
  bool Includes(Epoch epoch) const;
  std::string Describe() const;
};

struct CurvePoint {
  Epoch epoch = 0;
  ErrorCounts counts;
  std::optional<double> loss;

  Rational per() const { return ErrorRate(counts); }
};

struct SweepReport {
  std::vector<CurvePoint> points;  // epoch order
  std::vector<Epoch> skipped_epochs;
  std::optional<Epoch> selected_by_per;
  std::optional<Epoch> selected_by_loss;
  std::optional<double> baseline_per;
  double convergence_tolerance = kDefaultConvergenceTolerance;
  std::optional<Epoch> converged_at;
  SweepSchedule schedule;
  std::string scoring_config;
};

// Index of the minimum value; ties go to the smallest epoch. Returns nullopt
// for empty input.
template <typename T>
std::optional<Epoch> ArgminEpoch(std::span<const std::pair<Epoch, T>> values) {
  std::optional<std::pair<Epoch, T>> best;
  for (const auto &v : values) {
    if (!best || v.second < best->second ||
        (!(best->second < v.second) && v.first < best->first)) {
      best = v;
    }
  }
  if (!best) return std::nullopt;
  return best->first;
}

// Returns the hypothesis transcript text for a record. Implementations
// throw Error(kIo) with the epoch in the message when it cannot be read.
using HypothesisLoader = std::function<std::string(const CheckpointRecord &)>;

// Reads hypothesis_path, resolved against `base_dir` when relative.
HypothesisLoader FileHypothesisLoader(std::string base_dir);

struct SweepOptions {
  SweepSchedule schedule;
  ScoringFilter filter = ScoringFilter::Default();
  bool strict = false;  // strict inventory check on hypotheses
  int threads = 1;
  std::optional<double> baseline_per;
  double convergence_tolerance = kDefaultConvergenceTolerance;
};

// Scores every scheduled checkpoint. Records off the schedule are listed as
// skipped. A reference utterance absent from a decode is scored as all
// deletions; a decode id absent from the reference is Error(kIdMismatch).
SweepReport EvaluateSweep(std::span<const CheckpointRecord> manifest,
                          std::span<const Utterance> reference,
                          const PhoneInventory &inventory,
                          const SweepOptions &options,
                          const HypothesisLoader &loader);

// Throws Error(kEmptySweep) when the report has no points.
Epoch SelectBestPer(const SweepReport &report);
// Over every record with a loss, on or off the schedule. Throws
// Error(kNoLossData) if no record has one.
Epoch SelectBestLoss(std::span<const CheckpointRecord> manifest);
// First point with |PER - baseline| <= tolerance.
std::optional<Epoch> ConvergenceCheck(const SweepReport &report,
                                      double baseline_per, double tolerance);

struct CurveData {
  std::string csv;   // header "epoch,per,loss"
  std::string json;
};

CurveData EmitCurve(const SweepReport &report, int precision = kDefaultPrecision);

struct ParsedCurvePoint {
  Epoch epoch = 0;
  double per = 0.0;
  std::optional<double> loss;

  friend bool operator==(const ParsedCurvePoint &,
                         const ParsedCurvePoint &) = default;
};

// Reads back the CSV written by EmitCurve.
std::vector<ParsedCurvePoint> ParseCurveCsv(std::string_view csv);

nlohmann::ordered_json SweepReportToJson(const SweepReport &report,
                                         int precision = kDefaultPrecision);
std::string FormatSweepReport(const SweepReport &report,
                              int precision = kDefaultPrecision);

// Shortest decimal text that reads back as the same double.
std::string FormatDouble(double v);

}  // namespace persel

#endif  // PERSEL_SWEEP_H_
