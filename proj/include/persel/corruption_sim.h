// corruption_sim.h
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
// Synthetic recognition-error channel.
//
// Random numbers come from std::mt19937_64. Each utterance gets its own
// generator seeded with SplitMix64(seed ^ FNV-1a-64(utt_id)), so output does
// not depend on utterance order or thread count. Doubles are (x >> 11) *
// 2^-53 and bounded integers use rejection sampling, both fixed here rather
// than left to <random> distributions.
//
// Per reference phone one uniform draw u decides: u < p_del deletes,
// u < p_del + p_sub substitutes, anything else copies. Each of the n + 1
// slots around the reference phones independently receives one inserted
// phone with probability p_ins. Specials (silence, boundaries, punctuation)
// are copied through untouched and never drawn as substitutes or inserts.

#ifndef PERSEL_CORRUPTION_SIM_H_
#define PERSEL_CORRUPTION_SIM_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "persel/phone_inventory.h"
#include "persel/sweep.h"

namespace persel {

std::uint64_t SplitMix64(std::uint64_t x);
std::uint64_t Fnv1a64(std::string_view s);
// SplitMix64(seed ^ Fnv1a64(key)).
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  // Uniform in [0, n); n > 0.
  std::uint64_t Below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

struct CorruptionConfig {
  double p_sub = 0.0;
  double p_del = 0.0;
  double p_ins = 0.0;
  // Per-phone substitution rates; phones not listed use p_sub.
  std::map<std::string, double> per_phone_sub;
  // Source phone -> target distribution. Sources not listed substitute
  // uniformly over the other inventory phones.
  std::map<std::string, std::map<std::string, double>> confusion;
  std::uint64_t seed = 0;

  double SubRate(const Phone &phone) const;

  // Throws Error(kInvalidConfig) for rates out of range, p_sub + p_del > 1,
  // unknown phones in the maps, self-confusions or rows not summing to 1,
  // and Error(kNoSubstituteAvailable) if substitution is possible with
  // fewer than two inventory phones.
  void Validate(const PhoneInventory &inventory) const;
};

nlohmann::ordered_json CorruptionConfigToJson(const CorruptionConfig &config);
// Missing keys keep their defaults. Throws Error(kInvalidConfig).
CorruptionConfig CorruptionConfigFromJson(const nlohmann::json &j);

struct InjectedEdits {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t total() const { return substitutions + deletions + insertions; }
  InjectedEdits &operator+=(const InjectedEdits &o);
  friend bool operator==(const InjectedEdits &, const InjectedEdits &) = default;
};

struct CorruptionResult {
  PhoneSequence phones;
  InjectedEdits edits;
};

// Draws from `rng`. Does not validate the config; throws Error(kUnknownPhone)
// for phones outside the inventory.
CorruptionResult Corrupt(std::span<const Phone> seq,
                         const CorruptionConfig &config,
                         const PhoneInventory &inventory, Rng &rng);

// Validates, then corrupts with a generator seeded from config.seed.
PhoneSequence Corrupt(std::span<const Phone> seq, const CorruptionConfig &config,
                      const PhoneInventory &inventory);

// Validates, then corrupts with the per-utterance generator.
CorruptionResult CorruptUtterance(const Utterance &utt,
                                  const CorruptionConfig &config,
                                  const PhoneInventory &inventory);

struct CorruptedCorpus {
  std::vector<Utterance> hypotheses;  // reference order
  std::vector<InjectedEdits> edits;

  InjectedEdits Total() const;
};

CorruptedCorpus CorruptCorpus(std::span<const Utterance> references,
                              const CorruptionConfig &config,
                              const PhoneInventory &inventory, int threads = 1);

// One JSON object per line: {"utt_id":..,"injected":{"S":..,"D":..,"I":..}}.
std::string EditLogJsonl(const CorruptedCorpus &corpus);
// Transcript text preceded by a '#' header naming the generator and seed.
std::string FixtureText(const CorruptedCorpus &corpus,
                        const CorruptionConfig &config);

struct ScenarioPoint {
  Epoch epoch = 0;
  CorruptionConfig config;
  std::optional<double> validation_loss;
};

struct SweepScenario {
  std::vector<ScenarioPoint> points;  // strictly increasing epochs
};

// {"seed": n?, "epochs": [{"epoch", "p_sub", "p_del", "p_ins", "seed"?,
// "validation_loss"?, "per_phone_sub"?, "confusion"?}]}. An epoch without
// its own seed gets DeriveSeed(seed, "epoch:<epoch>"). Throws
// Error(kInvalidConfig), Error(kInvalidEpoch) or Error(kParse).
SweepScenario ParseScenario(std::string_view json_text);
std::string SerializeScenario(const SweepScenario &scenario);

// Writes hyp_eNNNN.txt, edits_eNNNN.jsonl and manifest.json into `out_dir`
// (created if needed) and returns the manifest text. Manifest paths are
// relative to `out_dir`. I/O failures are Error(kIo) naming the epoch.
std::string GenerateSweep(std::span<const Utterance> references,
                          const SweepScenario &scenario,
                          const PhoneInventory &inventory,
                          const std::string &out_dir, int threads = 1);

struct ReferenceCorpusSpec {
  std::size_t count = 300;
  std::size_t min_length = 20;
  std::size_t max_length = 60;
  std::uint64_t seed = 0;
};

// Ids utt00001, utt00002, ...; phones drawn uniformly from the regular
// inventory phones.
std::vector<Utterance> GenerateReferenceCorpus(const PhoneInventory &inventory,
                                               const ReferenceCorpusSpec &spec);

// Epochs 50..800 every 10 plus 207. The error rate falls monotonically
// from 0.40 to 0.10, steepest at the end; the loss is U-shaped with its
// minimum at epoch 207. Rates split evenly across S, D and I.
SweepScenario DivergenceScenario(std::uint64_t seed);

// Epochs 50..`last` every 10. The error rate drops by `step` per epoch from
// `start_rate` until it reaches `floor_rate`, then stays there.
struct ConvergenceSpec {
  double start_rate = 0.30;
  double floor_rate = 0.10;
  double step = 0.025;
  Epoch last_epoch = 300;
};
SweepScenario ConvergenceScenario(std::uint64_t seed,
                                  const ConvergenceSpec &spec = {});

// Evenly split rate: p_sub = p_del = p_ins = rate / 3.
CorruptionConfig EvenSplitConfig(double rate, std::uint64_t seed);

}  // namespace persel

#endif  // PERSEL_CORRUPTION_SIM_H_
