// corruption_sim.cc
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

#include "persel/corruption_sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "persel/error.h"
#include "persel/parallel.h"

namespace persel {
namespace {

constexpr double kRowSumTolerance = 1e-9;

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

std::string EpochFileName(const char *prefix, Epoch epoch, const char *ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_e%04d.%s", prefix, epoch, ext);
  return buf;
}

void WriteFile(const std::filesystem::path &path, const std::string &text,
               Epoch epoch) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out << text;
  if (!out) {
    throw Error(ErrorCode::kIo, "epoch " + std::to_string(epoch) +
                                    ": cannot write " + path.string());
  }
}

// Per-call view of the regular phones, for index-based draws.
struct PhoneTable {
  explicit PhoneTable(const PhoneInventory &inventory)
      : phones(inventory.phones().begin(), inventory.phones().end()) {}

  std::size_t IndexOf(const Phone &p) const {
    return static_cast<std::size_t>(
        std::lower_bound(phones.begin(), phones.end(), p) - phones.begin());
  }

  std::vector<Phone> phones;
};

Phone DrawSubstitute(const Phone &source, const CorruptionConfig &config,
                     const PhoneTable &table, Rng &rng) {
  auto row = config.confusion.find(source.label());
  if (row != config.confusion.end()) {
    const double u = rng.Uniform();
    double cum = 0.0;
    const std::string *last = nullptr;
    for (const auto &[target, p] : row->second) {
      if (p <= 0.0) continue;
      last = &target;
      cum += p;
      if (u < cum) return Phone(target);
    }
    return Phone(*last);
  }
  const std::size_t self = table.IndexOf(source);
  std::size_t j = static_cast<std::size_t>(rng.Below(table.phones.size() - 1));
  if (j >= self) ++j;
  return table.phones[j];
}

}  // namespace

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key) {
  return SplitMix64(seed ^ Fnv1a64(key));
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::Below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidConfig, "Rng::Below(0)");
  // Largest multiple of n representable; values at or above it are redrawn.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double CorruptionConfig::SubRate(const Phone &phone) const {
  auto it = per_phone_sub.find(phone.label());
  return it == per_phone_sub.end() ? p_sub : it->second;
}

namespace {

void CheckGlobalRates(const CorruptionConfig &c) {
  if (!IsProbability(c.p_sub) || !IsProbability(c.p_del)) {
    throw Error(ErrorCode::kInvalidConfig, "p_sub and p_del must lie in [0, 1]");
  }
  if (!(c.p_ins >= 0.0 && c.p_ins < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "p_ins must lie in [0, 1)");
  }
  if (c.p_sub + c.p_del > 1.0 + kRowSumTolerance) {
    throw Error(ErrorCode::kInvalidConfig, "p_sub + p_del exceeds 1");
  }
}

}  // namespace

void CorruptionConfig::Validate(const PhoneInventory &inventory) const {
  auto bad = [](const std::string &msg) {
    return Error(ErrorCode::kInvalidConfig, msg);
  };
  CheckGlobalRates(*this);
  bool any_sub = false;
  for (const Phone &p : inventory.phones()) {
    const double s = SubRate(p);
    if (!IsProbability(s)) throw bad("substitution rate of " + p.label() + " out of range");
    if (s + p_del > 1.0 + kRowSumTolerance) {
      throw bad("p_sub + p_del exceeds 1 for " + p.label());
    }
    if (s > 0.0) any_sub = true;
  }
  for (const auto &[label, rate] : per_phone_sub) {
    if (!inventory.phones().count(Phone(label))) {
      throw bad("per_phone_sub names unknown phone " + label);
    }
  }
  for (const auto &[source, row] : confusion) {
    if (!inventory.phones().count(Phone(source))) {
      throw bad("confusion row for unknown phone " + source);
    }
    double sum = 0.0;
    for (const auto &[target, p] : row) {
      if (!inventory.phones().count(Phone(target))) {
        throw bad("confusion target " + target + " not in inventory");
      }
      if (target == source && p > 0.0) {
        throw bad("confusion row " + source + " maps to itself");
      }
      if (!IsProbability(p)) throw bad("confusion weight out of range");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance) {
      throw bad("confusion row " + source + " sums to " + std::to_string(sum));
    }
  }
  if (any_sub && inventory.size() < 2) {
    throw Error(ErrorCode::kNoSubstituteAvailable,
                "substitution needs at least two phones");
  }
}

nlohmann::ordered_json CorruptionConfigToJson(const CorruptionConfig &config) {
  nlohmann::ordered_json j;
  j["p_sub"] = config.p_sub;
  j["p_del"] = config.p_del;
  j["p_ins"] = config.p_ins;
  j["seed"] = config.seed;
  if (!config.per_phone_sub.empty()) j["per_phone_sub"] = config.per_phone_sub;
  if (!config.confusion.empty()) j["confusion"] = config.confusion;
  return j;
}

CorruptionConfig CorruptionConfigFromJson(const nlohmann::json &j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, "corruption config must be an object");
  }
  CorruptionConfig c;
  try {
    if (j.contains("p_sub")) c.p_sub = j.at("p_sub").get<double>();
    if (j.contains("p_del")) c.p_del = j.at("p_del").get<double>();
    if (j.contains("p_ins")) c.p_ins = j.at("p_ins").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("per_phone_sub")) {
      c.per_phone_sub = j.at("per_phone_sub").get<std::map<std::string, double>>();
    }
    if (j.contains("confusion")) {
      c.confusion = j.at("confusion")
                        .get<std::map<std::string, std::map<std::string, double>>>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  return c;
}

InjectedEdits &InjectedEdits::operator+=(const InjectedEdits &o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  return *this;
}

CorruptionResult Corrupt(std::span<const Phone> seq,
                         const CorruptionConfig &config,
                         const PhoneInventory &inventory, Rng &rng) {
  const PhoneTable table(inventory);
  CorruptionResult out;
  out.phones.reserve(seq.size() + seq.size() / 4 + 1);
  auto maybe_insert = [&] {
    if (config.p_ins > 0.0 && rng.Uniform() < config.p_ins) {
      out.phones.push_back(table.phones[rng.Below(table.phones.size())]);
      ++out.edits.insertions;
    }
  };
  for (const Phone &p : seq) {
    if (!inventory.Contains(p)) {
      throw Error(ErrorCode::kUnknownPhone, p.label());
    }
    maybe_insert();
    if (inventory.IsSpecial(p)) {
      out.phones.push_back(p);
      continue;
    }
    const double u = rng.Uniform();
    if (u < config.p_del) {
      ++out.edits.deletions;
    } else if (u < config.p_del + config.SubRate(p)) {
      out.phones.push_back(DrawSubstitute(p, config, table, rng));
      ++out.edits.substitutions;
    } else {
      out.phones.push_back(p);
    }
  }
  maybe_insert();
  return out;
}

PhoneSequence Corrupt(std::span<const Phone> seq, const CorruptionConfig &config,
                      const PhoneInventory &inventory) {
  config.Validate(inventory);
  Rng rng(config.seed);
  return Corrupt(seq, config, inventory, rng).phones;
}

CorruptionResult CorruptUtterance(const Utterance &utt,
                                  const CorruptionConfig &config,
                                  const PhoneInventory &inventory) {
  config.Validate(inventory);
  Rng rng(DeriveSeed(config.seed, utt.id));
  return Corrupt(utt.phones, config, inventory, rng);
}

InjectedEdits CorruptedCorpus::Total() const {
  InjectedEdits total;
  for (const InjectedEdits &e : edits) total += e;
  return total;
}

CorruptedCorpus CorruptCorpus(std::span<const Utterance> references,
                              const CorruptionConfig &config,
                              const PhoneInventory &inventory, int threads) {
  config.Validate(inventory);
  CorruptedCorpus out;
  out.hypotheses.resize(references.size());
  out.edits.resize(references.size());
  ParallelFor(references.size(), threads, [&](std::size_t i) {
    const Utterance &ref = references[i];
    Rng rng(DeriveSeed(config.seed, ref.id));
    CorruptionResult r = Corrupt(ref.phones, config, inventory, rng);
    out.hypotheses[i] = Utterance{ref.id, std::move(r.phones)};
    out.edits[i] = r.edits;
  });
  return out;
}

std::string EditLogJsonl(const CorruptedCorpus &corpus) {
  std::string out;
  for (std::size_t i = 0; i < corpus.hypotheses.size(); ++i) {
    nlohmann::ordered_json line;
    line["utt_id"] = corpus.hypotheses[i].id;
    line["injected"] = {{"S", corpus.edits[i].substitutions},
                        {"D", corpus.edits[i].deletions},
                        {"I", corpus.edits[i].insertions}};
    out += line.dump() + '\n';
  }
  return out;
}

std::string FixtureText(const CorruptedCorpus &corpus,
                        const CorruptionConfig &config) {
  std::string out =
      "# persel synthetic decode; generator mt19937_64, per-utterance seed "
      "SplitMix64(seed ^ FNV-1a-64(utt_id))\n";
  out += "# config " + CorruptionConfigToJson(config).dump() + '\n';
  out += SerializeTranscripts(corpus.hypotheses);
  return out;
}

SweepScenario ParseScenario(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kParse, std::string("scenario: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("epochs") || !doc["epochs"].is_array()) {
    throw Error(ErrorCode::kInvalidConfig, "scenario needs an 'epochs' array");
  }
  std::uint64_t seed = 0;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      throw Error(ErrorCode::kInvalidConfig, "scenario seed must be unsigned");
    }
    seed = doc["seed"].get<std::uint64_t>();
  }
  SweepScenario scenario;
  for (const nlohmann::json &item : doc["epochs"]) {
    if (!item.is_object() || !item.contains("epoch") ||
        !item["epoch"].is_number_integer()) {
      throw Error(ErrorCode::kInvalidConfig, "scenario entry needs integer 'epoch'");
    }
    const auto epoch = item["epoch"].get<std::int64_t>();
    if (epoch <= 0 || epoch > INT32_MAX) {
      throw Error(ErrorCode::kInvalidEpoch, std::to_string(epoch));
    }
    ScenarioPoint point;
    point.epoch = static_cast<Epoch>(epoch);
    if (!scenario.points.empty() && point.epoch <= scenario.points.back().epoch) {
      throw Error(ErrorCode::kInvalidConfig,
                  "scenario epochs must be strictly increasing at " +
                      std::to_string(point.epoch));
    }
    point.config = CorruptionConfigFromJson(item);
    CheckGlobalRates(point.config);
    if (!item.contains("seed")) {
      point.config.seed = DeriveSeed(seed, "epoch:" + std::to_string(point.epoch));
    }
    if (item.contains("validation_loss") && !item["validation_loss"].is_null()) {
      if (!item["validation_loss"].is_number()) {
        throw Error(ErrorCode::kInvalidConfig, "validation_loss must be a number");
      }
      point.validation_loss = item["validation_loss"].get<double>();
    }
    scenario.points.push_back(std::move(point));
  }
  return scenario;
}

std::string SerializeScenario(const SweepScenario &scenario) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const ScenarioPoint &p : scenario.points) {
    nlohmann::ordered_json item;
    item["epoch"] = p.epoch;
    const nlohmann::ordered_json config = CorruptionConfigToJson(p.config);
    for (auto &[k, v] : config.items()) item[k] = v;
    if (p.validation_loss) item["validation_loss"] = *p.validation_loss;
    epochs.push_back(std::move(item));
  }
  doc["epochs"] = std::move(epochs);
  return doc.dump(2) + '\n';
}

std::string GenerateSweep(std::span<const Utterance> references,
                          const SweepScenario &scenario,
                          const PhoneInventory &inventory,
                          const std::string &out_dir, int threads) {
  for (std::size_t i = 1; i < scenario.points.size(); ++i) {
    if (scenario.points[i].epoch <= scenario.points[i - 1].epoch) {
      throw Error(ErrorCode::kInvalidConfig,
                  "scenario epochs must be strictly increasing");
    }
  }
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir + ": " + ec.message());

  std::vector<CheckpointRecord> manifest;
  for (const ScenarioPoint &point : scenario.points) {
    const CorruptedCorpus corpus =
        CorruptCorpus(references, point.config, inventory, threads);
    const std::string hyp_name = EpochFileName("hyp", point.epoch, "txt");
    WriteFile(dir / hyp_name, FixtureText(corpus, point.config), point.epoch);
    WriteFile(dir / EpochFileName("edits", point.epoch, "jsonl"),
              EditLogJsonl(corpus), point.epoch);
    manifest.push_back({point.epoch, hyp_name, point.validation_loss});
  }
  const std::string text = SerializeManifest(manifest);
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (out) out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest in " + out_dir);
  return text;
}

std::vector<Utterance> GenerateReferenceCorpus(const PhoneInventory &inventory,
                                               const ReferenceCorpusSpec &spec) {
  if (spec.count == 0 || spec.min_length == 0 || spec.min_length > spec.max_length) {
    throw Error(ErrorCode::kInvalidConfig,
                "need count > 0 and 0 < min_length <= max_length");
  }
  const std::vector<Phone> phones(inventory.phones().begin(),
                                  inventory.phones().end());
  std::vector<Utterance> corpus;
  corpus.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05zu", i + 1);
    Rng rng(DeriveSeed(spec.seed, id));
    const std::size_t len =
        spec.min_length + rng.Below(spec.max_length - spec.min_length + 1);
    Utterance utt{id, {}};
    utt.phones.reserve(len);
    for (std::size_t k = 0; k < len; ++k) {
      utt.phones.push_back(phones[rng.Below(phones.size())]);
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

CorruptionConfig EvenSplitConfig(double rate, std::uint64_t seed) {
  CorruptionConfig c;
  c.p_sub = c.p_del = c.p_ins = rate / 3.0;
  c.seed = seed;
  return c;
}

SweepScenario DivergenceScenario(std::uint64_t seed) {
  std::vector<Epoch> epochs;
  for (Epoch e = 50; e <= 800; e += 10) epochs.push_back(e);
  epochs.insert(std::upper_bound(epochs.begin(), epochs.end(), 207), 207);
  SweepScenario scenario;
  for (Epoch e : epochs) {
    const double remaining = (800.0 - e) / 750.0;
    const double rate = 0.10 + 0.30 * std::sqrt(std::max(0.0, remaining));
    ScenarioPoint p;
    p.epoch = e;
    p.config = EvenSplitConfig(rate, DeriveSeed(seed, "epoch:" + std::to_string(e)));
    p.validation_loss = 0.48 + 1e-6 * (e - 207.0) * (e - 207.0);
    scenario.points.push_back(std::move(p));
  }
  return scenario;
}

SweepScenario ConvergenceScenario(std::uint64_t seed,
                                  const ConvergenceSpec &spec) {
  if (!(spec.step > 0.0) || spec.floor_rate > spec.start_rate ||
      spec.floor_rate < 0.0 || spec.last_epoch < 50) {
    throw Error(ErrorCode::kInvalidConfig, "bad convergence scenario");
  }
  SweepScenario scenario;
  int i = 0;
  for (Epoch e = 50; e <= spec.last_epoch; e += 10, ++i) {
    double rate = spec.start_rate - spec.step * i;
    if (rate <= spec.floor_rate + 1e-12) rate = spec.floor_rate;
    ScenarioPoint p;
    p.epoch = e;
    p.config = EvenSplitConfig(rate, DeriveSeed(seed, "epoch:" + std::to_string(e)));
    scenario.points.push_back(std::move(p));
  }
  return scenario;
}

}  // namespace persel
