// cli.cc
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

#include "cli.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "persel/alignment.h"
#include "persel/corruption_sim.h"
#include "persel/error.h"
#include "persel/metrics.h"
#include "persel/ngram_lm.h"
#include "persel/phone_inventory.h"
#include "persel/preference.h"
#include "persel/sweep.h"

namespace persel {
namespace cli {
namespace {

struct GlobalConfig {
  std::string inventory_path;
  bool score_specials = false;
  bool phones_only = false;
  std::string silence = kDefaultSilence;
  std::string boundary = kDefaultBoundary;
  int precision = kDefaultPrecision;
  std::optional<int> threads;
  bool json = false;
  bool strict = false;
};

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for " + path);
  return buf.str();
}

void WriteFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

class Context {
 public:
  Context(const GlobalConfig &g, std::ostream &out) : g_(g), out_(out) {}

  const GlobalConfig &global() const { return g_; }
  std::ostream &out() { return out_; }

  int Threads() const {
    if (g_.threads) return *g_.threads;
    if (const char *env = std::getenv("PERSEL_THREADS")) {
      char *end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (*env == '\0' || *end != '\0' || v < 0 || v > 4096) {
        throw Error(ErrorCode::kInvalidConfig,
                    std::string("bad PERSEL_THREADS value \"") + env + "\"");
      }
      return static_cast<int>(v);
    }
    return 0;
  }

  const PhoneInventory &Inventory() {
    if (!inventory_) {
      if (g_.inventory_path.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "--inventory is required");
      }
      inventory_ = ParseInventory(ReadFile(g_.inventory_path));
    }
    return *inventory_;
  }

  ScoringFilter Filter() {
    if (g_.score_specials && g_.phones_only) {
      throw Error(ErrorCode::kInvalidConfig,
                  "--score-specials and --phones-only are exclusive");
    }
    if (g_.score_specials) return ScoringFilter::AllTokens();
    if (g_.phones_only) return ScoringFilter::PhonesOnly(Inventory());
    return ScoringFilter::Default(g_.silence, g_.boundary);
  }

  TranscriptCorpus LoadCorpus(const std::string &path, CorpusRole role) {
    TranscriptOptions opts;
    opts.role = role;
    opts.strict = g_.strict;
    return ParseTranscripts(ReadFile(path), Inventory(), opts);
  }

  void EmitJson(const nlohmann::ordered_json &j) { out_ << j.dump(2) << '\n'; }

 private:
  const GlobalConfig &g_;
  std::ostream &out_;
  std::optional<PhoneInventory> inventory_;
};

nlohmann::ordered_json UnknownJson(const TranscriptCorpus &c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto &[tok, n] : c.unknown_tokens) j[tok] = n;
  return j;
}

std::string UnknownText(const std::string &what, const TranscriptCorpus &c) {
  if (c.unknown_tokens.empty()) return "";
  std::string out = what + " unknown tokens:";
  for (const auto &[tok, n] : c.unknown_tokens) {
    out += ' ' + tok + '(' + std::to_string(n) + ')';
  }
  return out + '\n';
}

// validate

struct ValidateArgs {
  std::string corpus;
  std::string role = "ref";
};

void RunValidate(Context &ctx, const ValidateArgs &a) {
  const PhoneInventory &inv = ctx.Inventory();
  nlohmann::ordered_json j;
  j["inventory"] = {{"phones", inv.size()}, {"specials", inv.specials().size()}};
  std::string text = "inventory: " + std::to_string(inv.size()) + " phones, " +
                     std::to_string(inv.specials().size()) + " specials\n";
  if (!a.corpus.empty()) {
    const TranscriptCorpus corpus = ctx.LoadCorpus(
        a.corpus, a.role == "hyp" ? CorpusRole::kHypothesis : CorpusRole::kReference);
    const CoverageSummary cov = CoverageReport(corpus.utterances, inv);
    nlohmann::ordered_json c;
    c["utterances"] = corpus.utterances.size();
    c["total_phone_occurrences"] = cov.total_phone_occurrences;
    c["unique_phones_present"] = cov.unique_phones_present;
    c["inventory_size"] = cov.inventory_size;
    c["missing_phones"] = cov.missing_phones;
    c["unknown_tokens"] = UnknownJson(corpus);
    c["per_phone_counts"] = cov.per_phone_counts;
    j["corpus"] = std::move(c);
    text += "corpus: " + std::to_string(corpus.utterances.size()) +
            " utterances, " + std::to_string(cov.total_phone_occurrences) +
            " phone tokens\n";
    text += "coverage: " + std::to_string(cov.unique_phones_present) + "/" +
            std::to_string(cov.inventory_size) + " phones present\n";
    if (!cov.missing_phones.empty()) {
      text += "missing:";
      for (const std::string &m : cov.missing_phones) text += ' ' + m;
      text += '\n';
    }
    text += UnknownText("corpus", corpus);
  }
  if (ctx.global().json) {
    ctx.EmitJson(j);
  } else {
    ctx.out() << text;
  }
}

// align

struct AlignArgs {
  std::string ref;
  std::string hyp;
};

void RunAlign(Context &ctx, const AlignArgs &a) {
  PhoneSequence ref = MakeSequence(a.ref);
  PhoneSequence hyp = MakeSequence(a.hyp);
  if (!ctx.global().inventory_path.empty()) {
    const PhoneInventory &inv = ctx.Inventory();
    for (const PhoneSequence *seq : {&ref, &hyp}) {
      for (const Phone &p : *seq) {
        if (!inv.Contains(p) && ctx.global().strict) {
          throw Error(ErrorCode::kUnknownPhone, p.label());
        }
      }
    }
  }
  const ScoringFilter filter = ctx.Filter();
  const Alignment alignment = Align(filter.Apply(ref), filter.Apply(hyp));
  const int precision = ctx.global().precision;
  if (ctx.global().json) {
    nlohmann::ordered_json ops = nlohmann::ordered_json::array();
    for (const AlignmentOp &op : alignment.ops()) {
      nlohmann::ordered_json o;
      o["op"] = std::string(1, EditOpTag(op.op));
      o["ref"] = op.ref ? nlohmann::ordered_json(op.ref->label()) : nullptr;
      o["hyp"] = op.hyp ? nlohmann::ordered_json(op.hyp->label()) : nullptr;
      ops.push_back(std::move(o));
    }
    nlohmann::ordered_json j;
    j["scoring"] = filter.Describe();
    j["ops"] = std::move(ops);
    j["counts"] = CountsToJson(alignment.counts(), precision);
    ctx.EmitJson(j);
  } else {
    ctx.out() << FormatAlignment(alignment)
              << FormatCounts("PER", alignment.counts(), precision);
  }
}

// eval

struct EvalArgs {
  std::string ref;
  std::string hyp;
  bool wer = false;
  bool stats = false;
  bool per_utt = false;
};

void RunEval(Context &ctx, const EvalArgs &a) {
  const TranscriptCorpus refs = ctx.LoadCorpus(a.ref, CorpusRole::kReference);
  const TranscriptCorpus hyps = ctx.LoadCorpus(a.hyp, CorpusRole::kHypothesis);
  const ScoringFilter filter = ctx.Filter();
  const std::vector<ScoredUtterance> scored =
      ScoreCorpus(refs.utterances, hyps.utterances, filter, ctx.Threads());
  const ErrorRateReport report = CorpusPer(scored);
  const PhoneStats stats = ComputePhoneStats(scored);
  std::optional<ErrorCounts> wer;
  if (a.wer) {
    wer = CorpusWordErrors(refs.utterances, hyps.utterances, filter,
                           Phone(ctx.global().boundary));
  }
  const int precision = ctx.global().precision;
  if (ctx.global().json) {
    nlohmann::ordered_json j;
    j["scoring"] = filter.Describe();
    j["tie_break"] = "Match > Substitute > Delete > Insert";
    j["utterances"] = refs.utterances.size();
    j["per"] = ErrorReportToJson(report, precision);
    if (wer) j["wer"] = CountsToJson(*wer, precision);
    j["phone_stats"] = PhoneStatsToJson(stats);
    j["unknown_tokens"] = {{"reference", UnknownJson(refs)},
                           {"hypothesis", UnknownJson(hyps)}};
    ctx.EmitJson(j);
    return;
  }
  std::ostream &out = ctx.out();
  out << "scoring: " << filter.Describe() << '\n';
  out << "utterances: " << refs.utterances.size() << '\n';
  out << FormatCounts("PER", report.pooled, precision);
  if (wer) out << FormatCounts("WER", *wer, precision);
  out << UnknownText("reference", refs) << UnknownText("hypothesis", hyps);
  if (a.per_utt) {
    for (const ScoredUtterance &s : scored) {
      out << FormatCounts(s.id, s.alignment.counts(), precision);
    }
  }
  if (a.stats) out << FormatPhoneStats(stats);
}

// delta

struct DeltaArgs {
  std::string ref;
  std::string hyp_a;
  std::string hyp_b;
  std::size_t top = 5;
  std::string csv;
};

void RunDelta(Context &ctx, const DeltaArgs &a) {
  const TranscriptCorpus refs = ctx.LoadCorpus(a.ref, CorpusRole::kReference);
  const TranscriptCorpus hyp_a = ctx.LoadCorpus(a.hyp_a, CorpusRole::kHypothesis);
  const TranscriptCorpus hyp_b = ctx.LoadCorpus(a.hyp_b, CorpusRole::kHypothesis);
  const ScoringFilter filter = ctx.Filter();
  const int threads = ctx.Threads();
  const PhoneStats stats_a = ComputePhoneStats(
      ScoreCorpus(refs.utterances, hyp_a.utterances, filter, threads));
  const PhoneStats stats_b = ComputePhoneStats(
      ScoreCorpus(refs.utterances, hyp_b.utterances, filter, threads));
  const DetectionReport report = CompareDetection(stats_a, stats_b);
  if (!a.csv.empty()) WriteFile(a.csv, DetectionCsv(report));
  if (ctx.global().json) {
    nlohmann::ordered_json j;
    j["scoring"] = filter.Describe();
    j["detection"] = DetectionToJson(report, a.top);
    ctx.EmitJson(j);
  } else {
    ctx.out() << "scoring: " << filter.Describe() << '\n'
              << FormatDetection(report, a.top);
  }
}

// sweep

struct SweepArgs {
  std::string manifest;
  std::string ref;
  Epoch start_epoch = kDefaultStartEpoch;
  int stride = kDefaultStride;
  std::optional<double> baseline_per;
  std::string baseline_hyp;
  double tolerance = kDefaultConvergenceTolerance;
  std::string curve_csv;
  std::string curve_json;
};

void RunSweep(Context &ctx, const SweepArgs &a) {
  const std::vector<CheckpointRecord> manifest = LoadManifest(ReadFile(a.manifest));
  const TranscriptCorpus refs = ctx.LoadCorpus(a.ref, CorpusRole::kReference);
  SweepOptions opts;
  opts.schedule = {a.start_epoch, a.stride};
  opts.filter = ctx.Filter();
  opts.strict = ctx.global().strict;
  opts.threads = ctx.Threads();
  opts.convergence_tolerance = a.tolerance;
  opts.baseline_per = a.baseline_per;
  if (!a.baseline_hyp.empty()) {
    if (a.baseline_per) {
      throw Error(ErrorCode::kInvalidConfig,
                  "--baseline-per and --baseline-hyp are exclusive");
    }
    const TranscriptCorpus base = ctx.LoadCorpus(a.baseline_hyp, CorpusRole::kHypothesis);
    opts.baseline_per = CorpusPer(ScoreCorpus(refs.utterances, base.utterances,
                                              opts.filter, opts.threads))
                            .PooledRate()
                            .ToDouble();
  }
  const std::string base_dir =
      std::filesystem::path(a.manifest).parent_path().string();
  const SweepReport report = EvaluateSweep(manifest, refs.utterances, ctx.Inventory(),
                                           opts, FileHypothesisLoader(base_dir));
  SelectBestPer(report);  // Error(kEmptySweep) when nothing was scheduled
  const int precision = ctx.global().precision;
  if (!a.curve_csv.empty() || !a.curve_json.empty()) {
    const CurveData curve = EmitCurve(report, precision);
    if (!a.curve_csv.empty()) WriteFile(a.curve_csv, curve.csv);
    if (!a.curve_json.empty()) WriteFile(a.curve_json, curve.json);
  }
  if (ctx.global().json) {
    ctx.EmitJson(SweepReportToJson(report, precision));
  } else {
    ctx.out() << FormatSweepReport(report, precision);
  }
}

// lm

struct LmTrainArgs {
  std::string corpus;
  int order = 3;
  std::string smoothing = "witten-bell";
  double k = 1.0;
  bool closed_vocab = false;
  std::string out;
};

std::vector<Utterance> FilteredCorpus(Context &ctx, const std::string &path) {
  TranscriptCorpus corpus = ctx.LoadCorpus(path, CorpusRole::kReference);
  const ScoringFilter filter = ctx.Filter();
  for (Utterance &u : corpus.utterances) u.phones = filter.Apply(u.phones);
  return std::move(corpus.utterances);
}

void RunLmTrain(Context &ctx, const LmTrainArgs &a) {
  const std::vector<Utterance> corpus = FilteredCorpus(ctx, a.corpus);
  TrainOptions opts;
  opts.order = a.order;
  if (a.smoothing == "witten-bell") {
    opts.smoothing = Smoothing::WittenBell();
  } else if (a.smoothing == "add-k") {
    opts.smoothing = Smoothing::AddK(a.k);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown smoothing " + a.smoothing);
  }
  if (a.closed_vocab) {
    const ScoringFilter filter = ctx.Filter();
    for (const Phone &p : ctx.Inventory().phones()) {
      if (!filter.Excludes(p)) opts.extra_vocabulary.push_back(p.label());
    }
  }
  const NGramModel model = TrainNGram(corpus, opts);
  const std::string arpa = ExportArpa(model);
  if (a.out.empty()) {
    ctx.out() << arpa;
    return;
  }
  WriteFile(a.out, arpa);
  if (ctx.global().json) {
    nlohmann::ordered_json j;
    j["order"] = model.order();
    j["smoothing"] = opts.smoothing.Describe();
    nlohmann::ordered_json counts = nlohmann::ordered_json::array();
    for (int n = 1; n <= model.order(); ++n) counts.push_back(model.level(n).size());
    j["ngram_counts"] = std::move(counts);
    j["path"] = a.out;
    ctx.EmitJson(j);
  } else {
    ctx.out() << "wrote " << model.EntryCount() << " n-grams (order "
              << model.order() << ", " << opts.smoothing.Describe() << ") to "
              << a.out << '\n';
  }
}

struct LmPplArgs {
  std::string lm;
  std::string corpus;
  std::string oov = "strict";
};

void RunLmPpl(Context &ctx, const LmPplArgs &a) {
  const NGramModel model = ImportArpa(ReadFile(a.lm));
  const std::vector<Utterance> corpus = FilteredCorpus(ctx, a.corpus);
  OovPolicy policy;
  if (a.oov == "strict") {
    policy = OovPolicy::kStrict;
  } else if (a.oov == "unk") {
    policy = OovPolicy::kMapToUnknown;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown OOV policy " + a.oov);
  }
  const PerplexityResult r = Perplexity(model, corpus, policy);
  if (ctx.global().json) {
    nlohmann::ordered_json j;
    j["perplexity"] = r.perplexity;
    j["log10_prob"] = r.log10_prob;
    j["events"] = r.events;
    j["oov_events"] = r.oov_events;
    j["floored_events"] = r.floored_events;
    j["oov_policy"] = a.oov;
    j["oov_floor_prob"] = kOovFloorProb;
    ctx.EmitJson(j);
  } else {
    ctx.out() << "perplexity=" << FormatDouble(r.perplexity)
              << " log10_prob=" << FormatDouble(r.log10_prob)
              << " events=" << r.events << " oov=" << r.oov_events
              << " floored=" << r.floored_events << '\n';
  }
}

// simulate

struct SimCorpusArgs {
  ReferenceCorpusSpec spec;
  std::string out;
};

void RunSimCorpus(Context &ctx, const SimCorpusArgs &a) {
  const std::vector<Utterance> corpus =
      GenerateReferenceCorpus(ctx.Inventory(), a.spec);
  const std::string text =
      "# persel synthetic reference corpus; generator mt19937_64, seed " +
      std::to_string(a.spec.seed) + "\n" + SerializeTranscripts(corpus);
  if (a.out.empty()) {
    ctx.out() << text;
  } else {
    WriteFile(a.out, text);
    ctx.out() << "wrote " << corpus.size() << " utterances to " << a.out << '\n';
  }
}

struct SimSweepArgs {
  std::string ref;
  std::string scenario;
  std::string preset;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void RunSimSweep(Context &ctx, const SimSweepArgs &a) {
  if (a.scenario.empty() == a.preset.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "give exactly one of --scenario and --preset");
  }
  SweepScenario scenario;
  if (!a.scenario.empty()) {
    scenario = ParseScenario(ReadFile(a.scenario));
  } else if (a.preset == "divergence") {
    scenario = DivergenceScenario(a.seed);
  } else if (a.preset == "convergence") {
    scenario = ConvergenceScenario(a.seed);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown preset " + a.preset);
  }
  const TranscriptCorpus refs = ctx.LoadCorpus(a.ref, CorpusRole::kReference);
  const std::string manifest = GenerateSweep(refs.utterances, scenario,
                                             ctx.Inventory(), a.out_dir,
                                             ctx.Threads());
  if (ctx.global().json) {
    ctx.out() << manifest;
  } else {
    ctx.out() << "wrote " << scenario.points.size() << " checkpoints to "
              << (std::filesystem::path(a.out_dir) / "manifest.json").string()
              << '\n';
  }
}

struct SimCorruptArgs {
  std::string ref;
  double p_sub = 0.0;
  double p_del = 0.0;
  double p_ins = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string edits;
};

void RunSimCorrupt(Context &ctx, const SimCorruptArgs &a) {
  const TranscriptCorpus refs = ctx.LoadCorpus(a.ref, CorpusRole::kReference);
  CorruptionConfig config;
  config.p_sub = a.p_sub;
  config.p_del = a.p_del;
  config.p_ins = a.p_ins;
  config.seed = a.seed;
  const CorruptedCorpus corpus =
      CorruptCorpus(refs.utterances, config, ctx.Inventory(), ctx.Threads());
  const std::string text = FixtureText(corpus, config);
  if (!a.edits.empty()) WriteFile(a.edits, EditLogJsonl(corpus));
  if (a.out.empty()) {
    ctx.out() << text;
    return;
  }
  WriteFile(a.out, text);
  const InjectedEdits total = corpus.Total();
  ctx.out() << "wrote " << corpus.hypotheses.size() << " utterances to " << a.out
            << " (injected S=" << total.substitutions << " D=" << total.deletions
            << " I=" << total.insertions << ")\n";
}

// prefs

void RunPrefs(Context &ctx, const std::string &path) {
  const std::vector<Ballot> ballots = LoadBallots(ReadFile(path));
  const PreferenceSummary summary = Tally(ballots);
  if (ctx.global().json) {
    ctx.EmitJson(PreferenceToJson(summary));
  } else {
    ctx.out() << FormatPreference(summary);
  }
}

std::vector<std::unique_ptr<char[]>> ToArgv(const std::vector<std::string> &args,
                                            std::vector<char *> &argv) {
  std::vector<std::unique_ptr<char[]>> storage;
  std::vector<std::string> all{"persel"};
  all.insert(all.end(), args.begin(), args.end());
  for (const std::string &s : all) {
    auto buf = std::make_unique<char[]>(s.size() + 1);
    std::copy(s.begin(), s.end(), buf.get());
    buf[s.size()] = '\0';
    argv.push_back(buf.get());
    storage.push_back(std::move(buf));
  }
  return storage;
}

}  // namespace

int Run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"persel: phone error rate scoring and checkpoint selection"};
  app.name("persel");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalConfig g;
  int threads = -1;
  app.add_option("--inventory", g.inventory_path, "Phone inventory file");
  app.add_flag("--score-specials", g.score_specials,
               "Score every token, silence and boundaries included");
  app.add_flag("--phones-only", g.phones_only,
               "Drop every special token of the inventory before scoring");
  app.add_option("--silence", g.silence, "Silence label excluded by default")
      ->capture_default_str();
  app.add_option("--boundary", g.boundary, "Word boundary label")
      ->capture_default_str();
  app.add_option("--precision", g.precision, "Decimal places in reports")
      ->check(CLI::Range(1, 10))
      ->capture_default_str();
  app.add_option("--threads", threads,
                 "Worker threads, 0 = auto (default: $PERSEL_THREADS or 0)")
      ->check(CLI::Range(0, 4096));
  app.add_flag("--json", g.json, "Machine-readable JSON output");
  app.add_flag("--strict", g.strict, "Reject tokens outside the inventory");

  std::function<void(Context &)> action;

  ValidateArgs validate;
  CLI::App *v = app.add_subcommand("validate", "Inventory and corpus checks");
  v->add_option("--corpus", validate.corpus, "Transcript file");
  v->add_option("--role", validate.role, "ref or hyp")
      ->check(CLI::IsMember({"ref", "hyp"}))
      ->capture_default_str();
  v->callback([&] { action = [&](Context &c) { RunValidate(c, validate); }; });

  AlignArgs align;
  CLI::App *al = app.add_subcommand("align", "Align two phone sequences");
  al->add_option("--ref", align.ref, "Reference phones, space separated")->required();
  al->add_option("--hyp", align.hyp, "Hypothesis phones, space separated")->required();
  al->callback([&] { action = [&](Context &c) { RunAlign(c, align); }; });

  EvalArgs eval;
  CLI::App *ev = app.add_subcommand("eval", "Corpus PER, WER and phone statistics");
  ev->add_option("--ref", eval.ref, "Reference transcripts")->required();
  ev->add_option("--hyp", eval.hyp, "Hypothesis transcripts")->required();
  ev->add_flag("--wer", eval.wer, "Also report word error rate");
  ev->add_flag("--stats", eval.stats, "Print per-phone statistics");
  ev->add_flag("--per-utt", eval.per_utt, "Print per-utterance counts");
  ev->callback([&] { action = [&](Context &c) { RunEval(c, eval); }; });

  DeltaArgs delta;
  CLI::App *de = app.add_subcommand("delta", "Per-phone detection comparison of two models");
  de->add_option("--ref", delta.ref, "Reference transcripts")->required();
  de->add_option("--hyp-a", delta.hyp_a, "Decodes for model A")->required();
  de->add_option("--hyp-b", delta.hyp_b, "Decodes for model B")->required();
  de->add_option("--top", delta.top, "Rows shown at each end")->capture_default_str();
  de->add_option("--csv", delta.csv, "Write every row as CSV");
  de->callback([&] { action = [&](Context &c) { RunDelta(c, delta); }; });

  SweepArgs sweep;
  CLI::App *sw = app.add_subcommand("sweep", "Evaluate checkpoints and select one");
  sw->add_option("--manifest", sweep.manifest, "Checkpoint manifest (JSON)")->required();
  sw->add_option("--ref", sweep.ref, "Reference transcripts")->required();
  sw->add_option("--start-epoch", sweep.start_epoch, "First scheduled epoch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sw->add_option("--stride", sweep.stride, "Epochs between scheduled checkpoints")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sw->add_option("--baseline-per", sweep.baseline_per,
                 "PER of decodes of the original recordings")
      ->check(CLI::NonNegativeNumber);
  sw->add_option("--baseline-hyp", sweep.baseline_hyp,
                 "Decodes of the original recordings; baseline PER is computed");
  sw->add_option("--tolerance", sweep.tolerance, "Convergence band (absolute PER)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sw->add_option("--curve-csv", sweep.curve_csv, "Write the PER curve as CSV");
  sw->add_option("--curve-json", sweep.curve_json, "Write the PER curve as JSON");
  sw->callback([&] { action = [&](Context &c) { RunSweep(c, sweep); }; });

  CLI::App *lm = app.add_subcommand("lm", "Phone n-gram language models");
  lm->require_subcommand(1);
  LmTrainArgs lm_train;
  CLI::App *lt = lm->add_subcommand("train", "Train and write an ARPA model");
  lt->add_option("--corpus", lm_train.corpus, "Training transcripts")->required();
  lt->add_option("--order", lm_train.order, "N-gram order")->capture_default_str();
  lt->add_option("--smoothing", lm_train.smoothing, "witten-bell or add-k")
      ->check(CLI::IsMember({"witten-bell", "add-k"}))
      ->capture_default_str();
  lt->add_option("--k", lm_train.k, "Add-k constant")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  lt->add_flag("--closed-vocab", lm_train.closed_vocab,
               "Add every scored inventory phone to the vocabulary");
  lt->add_option("--out", lm_train.out, "ARPA output (default stdout)");
  lt->callback([&] { action = [&](Context &c) { RunLmTrain(c, lm_train); }; });
  LmPplArgs lm_ppl;
  CLI::App *lp = lm->add_subcommand("ppl", "Perplexity of an ARPA model on a corpus");
  lp->add_option("--lm", lm_ppl.lm, "ARPA model")->required();
  lp->add_option("--corpus", lm_ppl.corpus, "Evaluation transcripts")->required();
  lp->add_option("--oov", lm_ppl.oov, "strict or unk")
      ->check(CLI::IsMember({"strict", "unk"}))
      ->capture_default_str();
  lp->callback([&] { action = [&](Context &c) { RunLmPpl(c, lm_ppl); }; });

  CLI::App *sim = app.add_subcommand("simulate", "Synthetic fixtures");
  sim->require_subcommand(1);
  SimCorpusArgs sim_corpus;
  CLI::App *sc = sim->add_subcommand("corpus", "Random reference corpus");
  sc->add_option("--count", sim_corpus.spec.count, "Utterances")->capture_default_str();
  sc->add_option("--min-len", sim_corpus.spec.min_length, "Minimum phones")
      ->capture_default_str();
  sc->add_option("--max-len", sim_corpus.spec.max_length, "Maximum phones")
      ->capture_default_str();
  sc->add_option("--seed", sim_corpus.spec.seed, "Seed")->capture_default_str();
  sc->add_option("--out", sim_corpus.out, "Output file (default stdout)");
  sc->callback([&] { action = [&](Context &c) { RunSimCorpus(c, sim_corpus); }; });
  SimSweepArgs sim_sweep;
  CLI::App *ss = sim->add_subcommand("sweep", "Checkpoint decodes from a scenario");
  ss->add_option("--ref", sim_sweep.ref, "Reference transcripts")->required();
  ss->add_option("--scenario", sim_sweep.scenario, "Scenario file (JSON)");
  ss->add_option("--preset", sim_sweep.preset, "divergence or convergence")
      ->check(CLI::IsMember({"divergence", "convergence"}));
  ss->add_option("--seed", sim_sweep.seed, "Seed for presets")->capture_default_str();
  ss->add_option("--out-dir", sim_sweep.out_dir, "Output directory")->required();
  ss->callback([&] { action = [&](Context &c) { RunSimSweep(c, sim_sweep); }; });
  SimCorruptArgs sim_corrupt;
  CLI::App *scr = sim->add_subcommand("corrupt", "Corrupt one corpus");
  scr->add_option("--ref", sim_corrupt.ref, "Reference transcripts")->required();
  scr->add_option("--p-sub", sim_corrupt.p_sub, "Substitution rate")->capture_default_str();
  scr->add_option("--p-del", sim_corrupt.p_del, "Deletion rate")->capture_default_str();
  scr->add_option("--p-ins", sim_corrupt.p_ins, "Insertion rate")->capture_default_str();
  scr->add_option("--seed", sim_corrupt.seed, "Seed")->capture_default_str();
  scr->add_option("--out", sim_corrupt.out, "Output file (default stdout)");
  scr->add_option("--edits", sim_corrupt.edits, "Injected-edit log (JSON lines)");
  scr->callback([&] { action = [&](Context &c) { RunSimCorrupt(c, sim_corrupt); }; });

  std::string ballots;
  CLI::App *pr = app.add_subcommand("prefs", "Tally pairwise preference ballots");
  pr->add_option("--ballots", ballots, "Ballot CSV")->required();
  pr->callback([&] { action = [&](Context &c) { RunPrefs(c, ballots); }; });

  std::vector<char *> argv;
  const auto storage = ToArgv(args, argv);
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitInvalid;
  }
  if (threads >= 0) g.threads = threads;

  Context ctx(g, out);
  try {
    action(ctx);
  } catch (const Error &e) {
    err << "persel: " << e.what() << '\n';
    return e.code() == ErrorCode::kIo ? kExitIo : kExitInvalid;
  } catch (const std::exception &e) {
    err << "persel: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace cli
}  // namespace persel
