// sweep_test.cc
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
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "persel/corruption_sim.h"
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

PhoneInventory Inventory() {
  return ParseInventory("a\nk\nt\nsh\nee\ni\nsil\tspecial\n|\tspecial\n");
}

// Serves decode text from memory, keyed by hypothesis_path.
HypothesisLoader MapLoader(std::map<std::string, std::string> files) {
  return [files = std::move(files)](const CheckpointRecord &rec) {
    auto it = files.find(rec.hypothesis_path);
    if (it == files.end()) {
      throw Error(ErrorCode::kIo, "epoch " + std::to_string(rec.epoch) + ": missing");
    }
    return it->second;
  };
}

CurvePoint Point(Epoch e, std::uint64_t errors, std::uint64_t n,
                 std::optional<double> loss = std::nullopt) {
  CurvePoint p;
  p.epoch = e;
  p.counts.substitutions = errors;
  p.counts.correct = n - errors;
  p.counts.ref_length = n;
  p.loss = loss;
  return p;
}

TEST(ManifestTest, SortsByEpoch) {
  const auto recs = LoadManifest(
      R"([{"epoch": 60, "hypothesis_path": "b.txt", "validation_loss": 0.5},
          {"epoch": 50, "hypothesis_path": "a.txt"}])");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].epoch, 50);
  EXPECT_FALSE(recs[0].validation_loss.has_value());
  EXPECT_EQ(recs[1].epoch, 60);
  EXPECT_EQ(recs[1].validation_loss, 0.5);
}

TEST(ManifestTest, Errors) {
  try {
    LoadManifest(R"([{"epoch": 60, "hypothesis_path": "a"},
                     {"epoch": 60, "hypothesis_path": "b"}])");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateEpoch);
    EXPECT_EQ(e.message(), "60");
  }
  EXPECT_EQ(CodeOf([] { LoadManifest(R"([{"epoch": 0, "hypothesis_path": "a"}])"); }),
            ErrorCode::kInvalidEpoch);
  EXPECT_EQ(CodeOf([] { LoadManifest(R"([{"epoch": -5, "hypothesis_path": "a"}])"); }),
            ErrorCode::kInvalidEpoch);
  EXPECT_EQ(CodeOf([] { LoadManifest("{"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { LoadManifest(R"({"epoch": 1})"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { LoadManifest(R"([{"epoch": 5}])"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] {
              LoadManifest(R"([{"epoch": 5, "hypothesis_path": "a", "validation_loss": -1}])");
            }),
            ErrorCode::kParse);
}

TEST(ManifestTest, SeventySixScheduledCheckpoints) {
  std::vector<CheckpointRecord> recs;
  for (Epoch e = 800; e >= 50; e -= 10) recs.push_back({e, "h.txt", std::nullopt});
  const auto loaded = LoadManifest(SerializeManifest(recs));
  EXPECT_EQ(loaded.size(), 76u);
  EXPECT_TRUE(std::is_sorted(loaded.begin(), loaded.end(),
                             [](auto &a, auto &b) { return a.epoch < b.epoch; }));
}

TEST(ManifestTest, SerializeRoundTrip) {
  const std::vector<CheckpointRecord> recs{{50, "a.txt", 0.125}, {207, "b.txt", std::nullopt}};
  EXPECT_EQ(LoadManifest(SerializeManifest(recs)), recs);
}

TEST(ScheduleTest, Includes) {
  const SweepSchedule s;
  EXPECT_TRUE(s.Includes(50));
  EXPECT_TRUE(s.Includes(710));
  EXPECT_FALSE(s.Includes(40));
  EXPECT_FALSE(s.Includes(55));
  EXPECT_FALSE(s.Includes(207));
}

TEST(EvaluateTest, PerfectDecodesSelectEarliest) {
  const PhoneInventory inv = Inventory();
  const auto refs = ParseTranscripts("u1 a k t\nu2 sh ee\n", inv, {}).utterances;
  const std::string text = "u1 a k t\nu2 sh ee\n";
  const std::vector<CheckpointRecord> manifest{
      {50, "h", std::nullopt}, {60, "h", std::nullopt}, {70, "h", std::nullopt}};
  const SweepReport r =
      EvaluateSweep(manifest, refs, inv, {}, MapLoader({{"h", text}}));
  ASSERT_EQ(r.points.size(), 3u);
  for (const auto &p : r.points) EXPECT_EQ(p.per(), Rational(0, 1));
  EXPECT_EQ(r.selected_by_per, 50);
  EXPECT_FALSE(r.selected_by_loss.has_value());
}

TEST(EvaluateTest, OffScheduleEpochsAreSkipped) {
  const PhoneInventory inv = Inventory();
  const auto refs = ParseTranscripts("u1 a k t\n", inv, {}).utterances;
  const std::vector<CheckpointRecord> manifest{
      {50, "h", 0.6}, {55, "h", 0.1}, {60, "h", 0.7}};
  const SweepReport r =
      EvaluateSweep(manifest, refs, inv, {}, MapLoader({{"h", "u1 a k t\n"}}));
  EXPECT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.skipped_epochs, std::vector<Epoch>{55});
  // Loss selection still considers the skipped record.
  EXPECT_EQ(r.selected_by_loss, 55);
}

TEST(EvaluateTest, MissingUtteranceCountsAsDeletionsAndNIsConstant) {
  const PhoneInventory inv = Inventory();
  const auto refs = ParseTranscripts("u1 a k t\nu2 sh ee\n", inv, {}).utterances;
  const std::vector<CheckpointRecord> manifest{{50, "full", std::nullopt},
                                               {60, "partial", std::nullopt}};
  const SweepReport r = EvaluateSweep(
      manifest, refs, inv, {},
      MapLoader({{"full", "u1 a k t\nu2 sh ee\n"}, {"partial", "u1 a k t\n"}}));
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points[0].counts.ref_length, r.points[1].counts.ref_length);
  EXPECT_EQ(r.points[1].counts.deletions, 2u);
}

TEST(EvaluateTest, ExtraDecodeIdAndUnreadableFile) {
  const PhoneInventory inv = Inventory();
  const auto refs = ParseTranscripts("u1 a k t\n", inv, {}).utterances;
  const std::vector<CheckpointRecord> manifest{{50, "h", std::nullopt}};
  try {
    EvaluateSweep(manifest, refs, inv, {}, MapLoader({{"h", "u1 a\nu7 k\n"}}));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIdMismatch);
    EXPECT_NE(e.message().find("epoch 50"), std::string::npos);
  }
  try {
    EvaluateSweep(manifest, refs, inv, {}, FileHypothesisLoader("/nonexistent-dir"));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(e.message().find("epoch 50"), std::string::npos);
  }
}

TEST(EvaluateTest, ReportIsIdenticalAcrossThreadCounts) {
  const PhoneInventory inv = Inventory();
  const auto refs =
      GenerateReferenceCorpus(inv, {.count = 200, .min_length = 5, .max_length = 30, .seed = 3});
  const std::string dir = ::testing::TempDir() + "/persel_sweep_threads";
  GenerateSweep(refs, ConvergenceScenario(9, {.last_epoch = 150}), inv, dir);
  std::string previous;
  for (int threads : {1, 3, 8}) {
    SweepOptions opts;
    opts.threads = threads;
    opts.baseline_per = 0.10;
    std::ifstream in(dir + "/manifest.json");
    std::stringstream buf;
    buf << in.rdbuf();
    const SweepReport r = EvaluateSweep(LoadManifest(buf.str()), refs, inv, opts,
                                        FileHypothesisLoader(dir));
    const std::string json = SweepReportToJson(r).dump(2);
    if (!previous.empty()) EXPECT_EQ(json, previous);
    previous = json;
  }
}

// Rates 0.30, 0.20, 0.10, 0.15 at epochs 50..80 over more than 10k phones.
TEST(EvaluateTest, SimulatedSweepSelectsLowestRate) {
  const PhoneInventory inv = Inventory();
  const auto refs = GenerateReferenceCorpus(
      inv, {.count = 300, .min_length = 30, .max_length = 60, .seed = 77});
  SweepScenario scenario;
  const double rates[] = {0.30, 0.20, 0.10, 0.15};
  for (int i = 0; i < 4; ++i) {
    scenario.points.push_back(
        {50 + 10 * i, EvenSplitConfig(rates[i], DeriveSeed(5, std::to_string(i))), {}});
  }
  const std::string dir = ::testing::TempDir() + "/persel_sweep_sim";
  const auto manifest = LoadManifest(GenerateSweep(refs, scenario, inv, dir));
  const SweepReport r = EvaluateSweep(manifest, refs, inv, {}, FileHypothesisLoader(dir));
  ASSERT_GE(r.points[0].counts.ref_length, 10000u);
  EXPECT_EQ(r.selected_by_per, 70);
}

TEST(SelectTest, BestPerArgminAndTies) {
  SweepReport r;
  r.points = {Point(50, 2, 10), Point(60, 1, 10), Point(70, 3, 10)};
  EXPECT_EQ(SelectBestPer(r), 60);
  r.points = {Point(50, 1, 10), Point(60, 1, 10)};
  EXPECT_EQ(SelectBestPer(r), 50);
  // Equal value with different raw counts is still a tie.
  r.points = {Point(60, 2, 20), Point(50, 1, 10)};
  EXPECT_EQ(SelectBestPer(r), 50);
  r.points.clear();
  EXPECT_EQ(CodeOf([&] { SelectBestPer(r); }), ErrorCode::kEmptySweep);
}

TEST(SelectTest, BestPerInvariantUnderPermutationAndMonotoneMaps) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    SweepReport r;
    for (Epoch e = 50; e <= 300; e += 10) r.points.push_back(Point(e, rng() % 40, 100));
    const Epoch best = SelectBestPer(r);
    std::shuffle(r.points.begin(), r.points.end(), rng);
    EXPECT_EQ(SelectBestPer(r), best);
    std::vector<std::pair<Epoch, double>> mapped;
    for (const auto &p : r.points) {
      const double x = p.per().ToDouble();
      mapped.emplace_back(p.epoch, std::exp(3 * x) + x);
    }
    EXPECT_EQ(ArgminEpoch<double>(mapped), best);
  }
}

TEST(SelectTest, BestLoss) {
  EXPECT_EQ(SelectBestLoss(std::vector<CheckpointRecord>{
                {200, "", 0.51}, {207, "", 0.48}, {210, "", 0.49}}),
            207);
  EXPECT_EQ(SelectBestLoss(std::vector<CheckpointRecord>{{90, "", 1.5}}), 90);
  EXPECT_EQ(SelectBestLoss(std::vector<CheckpointRecord>{
                {80, "", 0.4}, {70, "", 0.4}}),
            70);
  EXPECT_EQ(CodeOf([] {
              SelectBestLoss(std::vector<CheckpointRecord>{{50, "", std::nullopt}});
            }),
            ErrorCode::kNoLossData);
}

TEST(ConvergenceTest, ThresholdCrossing) {
  SweepReport r;
  r.points = {Point(690, 150, 1000), Point(700, 130, 1000), Point(710, 105, 1000),
              Point(720, 101, 1000)};
  EXPECT_EQ(ConvergenceCheck(r, 0.10, 0.01), 710);
  EXPECT_FALSE(ConvergenceCheck(r, 0.01, 0.005).has_value());
  // A point exactly on the band edge counts as converged.
  EXPECT_EQ(ConvergenceCheck(r, 0.10, 0.005), 710);
}

TEST(CurveTest, CsvShapeAndRoundTrip) {
  SweepReport r;
  r.points = {Point(50, 1, 3, 0.5), Point(60, 1, 7)};
  const CurveData c = EmitCurve(r);
  EXPECT_EQ(std::count(c.csv.begin(), c.csv.end(), '\n'), 3);
  EXPECT_EQ(c.csv.substr(0, 15), "epoch,per,loss\n");
  const auto parsed = ParseCurveCsv(c.csv);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].epoch, 50);
  EXPECT_EQ(parsed[0].per, 1.0 / 3.0);
  EXPECT_EQ(parsed[0].loss, 0.5);
  EXPECT_EQ(parsed[1].per, 1.0 / 7.0);
  EXPECT_FALSE(parsed[1].loss.has_value());
  EXPECT_TRUE(c.csv.find("60,") != std::string::npos);
  EXPECT_EQ(c.csv.back(), '\n');
}

TEST(CurveTest, NoLossesLeaveColumnEmpty) {
  SweepReport r;
  r.points = {Point(50, 1, 3), Point(60, 1, 4), Point(70, 0, 4)};
  const CurveData c = EmitCurve(r);
  std::size_t pos = c.csv.find('\n') + 1;
  while (pos < c.csv.size()) {
    const std::size_t end = c.csv.find('\n', pos);
    EXPECT_EQ(c.csv[end - 1], ',');
    pos = end + 1;
  }
}

TEST(CurveTest, JsonMirrorsReport) {
  SweepReport r;
  r.points = {Point(50, 1, 4, 0.3)};
  r.selected_by_per = 50;
  const auto j = nlohmann::json::parse(EmitCurve(r).json);
  EXPECT_EQ(j["points"][0]["epoch"], 50);
  EXPECT_EQ(j["points"][0]["per"]["decimal"], "0.2500");
  EXPECT_EQ(j["selected_by_per"], 50);
  EXPECT_TRUE(j["selected_by_loss"].is_null());
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(0.48), "0.48");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(FormatDouble(third)), third);
}

}  // namespace
}  // namespace persel
