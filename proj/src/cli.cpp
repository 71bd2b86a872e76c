// Copyright 2026 The dsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsynth/cli.hpp"

#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dsynth/character_pool.hpp"
#include "dsynth/dataset.hpp"
#include "dsynth/evaluation.hpp"
#include "dsynth/io.hpp"
#include "dsynth/rng.hpp"
#include "dsynth/serialization.hpp"
#include "spdlog/sinks/ostream_sink.h"
#include "spdlog/spdlog.h"

namespace dsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    std::string lower;
    for (char c : key) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower.find("token") != std::string::npos || lower.find("api_key") != std::string::npos ||
        lower.find("secret") != std::string::npos) {
      throw ConfigError(where + "." + key +
                        ": secrets are read from <PREFIX>_*_TOKEN environment variables, not config");
    }
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key " + where + "." + key);
  }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::optional<FaultKind> parse_fault_kind(std::string_view s) {
  if (s == "backend_error") return FaultKind::kBackendError;
  if (s == "malformed") return FaultKind::kMalformed;
  if (s == "empty_body") return FaultKind::kEmptyBody;
  return std::nullopt;
}

std::string_view fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::kBackendError: return "backend_error";
    case FaultKind::kMalformed: return "malformed";
    case FaultKind::kEmptyBody: return "empty_body";
  }
  return "backend_error";
}

Endpoint parse_endpoint(const json& doc, const std::string& where, const std::string& token_env) {
  check_keys(doc, where, {"url", "model", "timeout_seconds"});
  Endpoint e;
  e.url = get_as<std::string>(doc, "url", where, "");
  if (e.url.empty()) throw ConfigError(where + ".url is required");
  parse_url(e.url);
  e.model = get_as<std::string>(doc, "model", where, "");
  e.timeout_seconds = get_as<double>(doc, "timeout_seconds", where, 120.0);
  if (e.timeout_seconds <= 0) throw ConfigError(where + ".timeout_seconds must be positive");
  e.token_env = token_env;
  return e;
}

json endpoint_to_json(const Endpoint& e) {
  return {{"url", e.url}, {"model", e.model}, {"timeout_seconds", e.timeout_seconds},
          {"token_env", e.token_env}};
}

}  // namespace

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  check_keys(doc, "config",
             {"pool", "language", "dialogues", "seed", "parallelism", "output_dir", "variant",
              "critique_final", "participants", "topics", "generation", "retry", "audio", "mock",
              "mock_faults", "env_prefix", "backends"});
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  const std::string where = "config";
  if (doc.contains("pool")) c.pool = resolve(get_as<std::string>(doc, "pool", where, ""));
  if (doc.contains("output_dir"))
    c.output_dir = resolve(get_as<std::string>(doc, "output_dir", where, ""));
  if (doc.contains("language")) {
    auto lang = parse_language(get_as<std::string>(doc, "language", where, ""));
    if (!lang) throw ConfigError("config.language must be CN or EN");
    c.pipeline.language = *lang;
  }
  const long long dialogues = get_as<long long>(doc, "dialogues", where, 1);
  if (dialogues < 0) throw ConfigError("config.dialogues must be >= 1");
  c.dialogues = static_cast<std::size_t>(dialogues);
  c.seed = get_as<std::uint64_t>(doc, "seed", where, 0);
  c.parallelism = get_as<int>(doc, "parallelism", where, 1);
  c.mock = get_as<bool>(doc, "mock", where, false);
  c.env_prefix = get_as<std::string>(doc, "env_prefix", where, "DSYNTH");
  c.pipeline.critique_final = get_as<bool>(doc, "critique_final", where, false);

  if (doc.contains("variant")) {
    const json& v = doc["variant"];
    check_keys(v, "config.variant", {"mode", "loops"});
    auto mode = parse_variant_mode(get_as<std::string>(v, "mode", "config.variant", "critic_loop"));
    if (!mode) throw ConfigError("config.variant.mode must be writer_only, writer_self_refine or critic_loop");
    int dflt = *mode == VariantMode::kCriticLoop ? 2 : (*mode == VariantMode::kWriterOnly ? 0 : 1);
    c.pipeline.variant = {*mode, get_as<int>(v, "loops", "config.variant", dflt)};
  }
  if (doc.contains("participants")) {
    const json& p = doc["participants"];
    check_keys(p, "config.participants", {"weights", "prefer_related"});
    c.pipeline.prefer_related = get_as<bool>(p, "prefer_related", "config.participants", true);
    if (p.contains("weights")) {
      check_keys(p["weights"], "config.participants.weights", {"2", "3", "4", "5", "6", "7", "8"});
      c.pipeline.participant_weights.clear();
      for (const auto& [k, w] : p["weights"].items()) {
        if (!w.is_number() || w.get<double>() < 0) {
          throw ConfigError("config.participants.weights." + k + " must be a non-negative number");
        }
        c.pipeline.participant_weights[std::stoi(k)] = w.get<double>();
      }
    }
  }
  c.pipeline.topics = get_as<std::vector<std::string>>(doc, "topics", where, default_topics());
  if (doc.contains("generation")) {
    const json& g = doc["generation"];
    check_keys(g, "config.generation", {"temperature", "max_tokens"});
    c.pipeline.generation.temperature = get_as<double>(g, "temperature", "config.generation", 0.8);
    c.pipeline.generation.max_tokens = get_as<int>(g, "max_tokens", "config.generation", 2048);
  }
  if (doc.contains("retry")) {
    const json& r = doc["retry"];
    check_keys(r, "config.retry", {"max_attempts", "base_delay_seconds", "backoff_factor"});
    c.pipeline.retry.max_attempts = get_as<int>(r, "max_attempts", "config.retry", 3);
    c.pipeline.retry.base_delay_seconds = get_as<double>(r, "base_delay_seconds", "config.retry", 1.0);
    c.pipeline.retry.backoff_factor = get_as<double>(r, "backoff_factor", "config.retry", 2.0);
  }
  if (doc.contains("audio")) {
    const json& a = doc["audio"];
    check_keys(a, "config.audio", {"gap_seconds", "sample_rate", "history_audio"});
    c.pipeline.gap_seconds = get_as<double>(a, "gap_seconds", "config.audio", kDefaultTurnGapSeconds);
    c.pipeline.sample_rate = get_as<int>(a, "sample_rate", "config.audio", kCanonicalSampleRate);
    c.history_audio = get_as<bool>(a, "history_audio", "config.audio", true);
  }
  if (doc.contains("mock_faults")) {
    const json& f = doc["mock_faults"];
    check_keys(f, "config.mock_faults", {"stage", "ordinals", "failures", "kind"});
    if (get_as<std::string>(f, "stage", "config.mock_faults", "writer") != "writer") {
      throw ConfigError("config.mock_faults.stage: only the writer stage can be faulted");
    }
    MockFaults mf;
    auto kind = parse_fault_kind(get_as<std::string>(f, "kind", "config.mock_faults", "backend_error"));
    if (!kind) throw ConfigError("config.mock_faults.kind must be backend_error, malformed or empty_body");
    mf.kind = *kind;
    mf.ordinals = get_as<std::vector<std::size_t>>(f, "ordinals", "config.mock_faults", {0});
    if (f.contains("failures")) mf.failures = get_as<std::size_t>(f, "failures", "config.mock_faults", 0);
    c.mock_faults = mf;
  }
  if (doc.contains("backends")) {
    const json& b = doc["backends"];
    check_keys(b, "config.backends", {"writer", "synthesizer", "critic", "predictor"});
    const std::string& pre = c.env_prefix;
    if (b.contains("writer"))
      c.backends.writer = parse_endpoint(b["writer"], "config.backends.writer", pre + "_WRITER_TOKEN");
    if (b.contains("synthesizer"))
      c.backends.synthesizer =
          parse_endpoint(b["synthesizer"], "config.backends.synthesizer", pre + "_SYNTH_TOKEN");
    if (b.contains("critic"))
      c.backends.critic = parse_endpoint(b["critic"], "config.backends.critic", pre + "_CRITIC_TOKEN");
    if (b.contains("predictor"))
      c.backends.predictor =
          parse_endpoint(b["predictor"], "config.backends.predictor", pre + "_PREDICTOR_TOKEN");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

void validate_run_config(const RunConfig& c) {
  if (c.dialogues < 1) throw ConfigError("dialogues must be >= 1");
  if (c.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (c.pipeline.variant.loops < 0) throw ConfigError("variant.loops must be >= 0");
  c.pipeline.variant.validate();
  if (c.pool.empty()) throw ConfigError("pool path is required");
  if (!fs::exists(c.pool)) throw ConfigError("pool file does not exist: " + c.pool.string());
  if (c.pipeline.sample_rate <= 0) throw ConfigError("audio.sample_rate must be positive");
  if (c.pipeline.gap_seconds < 0) throw ConfigError("audio.gap_seconds must be >= 0");
  if (c.pipeline.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (c.pipeline.retry.base_delay_seconds < 0 || c.pipeline.retry.backoff_factor < 1) {
    throw ConfigError("retry delays must be non-negative with backoff_factor >= 1");
  }
  double total = 0;
  for (const auto& [count, w] : c.pipeline.participant_weights) {
    if (count < 2) throw ConfigError("participant counts start at 2");
    total += w;
  }
  if (total <= 0) throw ConfigError("participants.weights must have a positive entry");
  if (c.mock_faults) {
    for (std::size_t ord : c.mock_faults->ordinals) {
      if (ord >= c.dialogues) {
        throw ConfigError("mock_faults.ordinals: " + std::to_string(ord) + " is not below dialogues");
      }
    }
  }
  if (!c.mock) {
    if (!c.backends.writer) throw ConfigError("backends.writer is required outside mock mode");
    if (!c.backends.synthesizer) throw ConfigError("backends.synthesizer is required outside mock mode");
    if (c.pipeline.variant.mode == VariantMode::kCriticLoop && c.pipeline.variant.loops > 0 &&
        !c.backends.critic) {
      throw ConfigError("backends.critic is required for critic_loop outside mock mode");
    }
  }
}

json run_config_to_json(const RunConfig& c) {
  json backends = json::object();
  if (c.backends.writer) backends["writer"] = endpoint_to_json(*c.backends.writer);
  if (c.backends.synthesizer) backends["synthesizer"] = endpoint_to_json(*c.backends.synthesizer);
  if (c.backends.critic) backends["critic"] = endpoint_to_json(*c.backends.critic);
  if (c.backends.predictor) backends["predictor"] = endpoint_to_json(*c.backends.predictor);
  json doc = {{"pool", c.pool.string()},
              {"dialogues", c.dialogues},
              {"seed", c.seed},
              {"parallelism", c.parallelism},
              {"output_dir", c.output_dir.string()},
              {"mock", c.mock},
              {"history_audio", c.history_audio},
              {"env_prefix", c.env_prefix},
              {"backends", std::move(backends)},
              {"pipeline", pipeline_config_to_json(c.pipeline)}};
  if (c.mock_faults) {
    doc["mock_faults"] = {{"kind", std::string(fault_kind_name(c.mock_faults->kind))},
                          {"ordinals", c.mock_faults->ordinals},
                          {"failures", c.mock_faults->failures}};
  }
  return doc;
}

std::set<std::uint64_t> fault_seeds(const RunConfig& c) {
  std::set<std::uint64_t> seeds;
  if (!c.mock_faults) return seeds;
  for (std::size_t ord : c.mock_faults->ordinals) {
    seeds.insert(stream_seed(derive_run_seed(c.seed, ord), SeedStream::kWriter));
  }
  return seeds;
}

namespace {

// Stands in for the critic in variants that never call it.
class UnusedCritic final : public CriticBackend {
 public:
  std::string id() const override { return "none"; }
  std::string review(const CritiqueRequest&) override {
    throw ConfigError("no critic backend configured");
  }
};

struct Globals {
  std::string config;
  bool mock = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::string out;
  std::string log_level = "info";
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("dsynth", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::from_str(level));
  return logger;
}

RunConfig effective_config(const Globals& g) {
  RunConfig c;
  if (!g.config.empty()) c = load_run_config(g.config);
  if (g.mock) c.mock = true;
  if (g.seed) c.seed = *g.seed;
  if (g.parallelism) c.parallelism = *g.parallelism;
  if (!g.out.empty()) c.output_dir = g.out;
  return c;
}

fs::path manifest_arg(const std::string& manifest, const Globals& g, const RunConfig* config) {
  if (!manifest.empty()) return manifest;
  if (!g.out.empty()) return fs::path(g.out) / "manifest.jsonl";
  if (config) return config->output_dir / "manifest.jsonl";
  throw ConfigError("no manifest given (use --manifest or --out)");
}

int cmd_generate(const Globals& g, std::optional<std::size_t> dialogues, std::ostream& out,
                 spdlog::logger& log, const std::atomic<bool>* stop) {
  if (g.config.empty()) throw ConfigError("generate requires --config");
  RunConfig c = effective_config(g);
  if (dialogues) c.dialogues = *dialogues;
  validate_run_config(c);
  const CharacterPool pool = load_pool(c.pool);

  // Refuse reruns before spending any backend calls; write_corpus checks again.
  {
    std::set<std::string> existing;
    const fs::path manifest = c.output_dir / "manifest.jsonl";
    if (fs::exists(manifest)) {
      for (const auto& r : load_corpus(manifest, false)) existing.insert(r.dialogue_id);
    }
    for (std::size_t ord = 0; ord < c.dialogues; ++ord) {
      const std::string id = make_run_id(c.pipeline.language, ord, derive_run_seed(c.seed, ord));
      if (existing.count(id) || fs::exists(c.output_dir / "history" / id)) throw DuplicateIdError(id);
    }
  }

  MockWriter mock_writer;
  MockSynthesizer mock_synth;
  MockCritic mock_critic;
  UnusedCritic unused_critic;
  std::unique_ptr<HttpWriter> http_writer;
  std::unique_ptr<HttpSynthesizer> http_synth;
  std::unique_ptr<HttpCritic> http_critic;
  WriterBackend* writer = &mock_writer;
  SynthesizerBackend* synth = &mock_synth;
  CriticBackend* critic = &mock_critic;
  if (!c.mock) {
    http_writer = std::make_unique<HttpWriter>(*c.backends.writer);
    http_synth = std::make_unique<HttpSynthesizer>(*c.backends.synthesizer);
    writer = http_writer.get();
    synth = http_synth.get();
    if (c.backends.critic) {
      http_critic = std::make_unique<HttpCritic>(*c.backends.critic);
      critic = http_critic.get();
    } else {
      critic = &unused_critic;
    }
  }
  std::unique_ptr<FaultInjectingWriter> faulty;
  if (c.mock_faults) {
    faulty = std::make_unique<FaultInjectingWriter>(
        *writer, FaultPlan{c.mock_faults->kind, c.mock_faults->failures, fault_seeds(c)});
    writer = faulty.get();
  }

  log.info("generating {} {} dialogue(s) with {} (seed {}, parallelism {})", c.dialogues,
           to_string(c.pipeline.language), c.pipeline.variant.label(), c.seed, c.parallelism);
  const BatchResult batch =
      run_batch(pool, c.pipeline, c.dialogues, c.seed, c.parallelism, Backends{*writer, *synth, *critic}, stop);

  const CorpusWriteResult written =
      write_corpus(batch.runs, c.output_dir, CorpusWriteOptions{c.history_audio});
  write_file_atomic(c.output_dir / "run_config.json", run_config_to_json(c).dump(2) + "\n");

  for (const PipelineRun& run : batch.runs) {
    out << to_string(run.status) << ' ' << run.run_id;
    if (run.status == RunStatus::kCompleted) {
      out << " iterations=" << run.iterations.size()
          << " utterances=" << run.final().script.utterances.size();
    } else if (run.failure) {
      out << " stage=" << run.failure->stage << " error=" << run.failure->error_kind
          << " attempts=" << run.failure->attempts << " t=" << run.failure->t;
      log.error("run {} failed in {} after {} attempt(s): {}", run.run_id, run.failure->stage,
                run.failure->attempts, run.failure->message);
    }
    out << '\n';
  }
  out << "completed " << batch.completed() << '/' << batch.runs.size() << ", failed "
      << batch.failed_ordinals.size() << ", cancelled " << batch.cancelled_ordinals.size() << '\n';
  out << "manifest " << written.manifest.string() << '\n';
  if (!written.records.empty()) out << '\n' << render_stats_table(compute_stats(written.records));

  if (!batch.failed_ordinals.empty()) return kExitBackend;
  if (!batch.cancelled_ordinals.empty()) return kExitInterrupted;
  return kExitOk;
}

int cmd_stats(const Globals& g, const std::string& manifest, bool as_json, bool no_audio_check,
              bool published, std::ostream& out) {
  const fs::path path = manifest_arg(manifest, g, nullptr);
  const auto records = load_corpus(path, !no_audio_check);
  const CorpusStats stats = compute_stats(records);
  if (as_json) {
    json doc = stats_to_json(stats);
    if (published) {
      for (const auto& [lang, s] : stats.per_language) {
        const PublishedLanguageStats p = published_multitalk_stats(lang);
        doc["published"][std::string(to_string(lang))] = {
            {"utterances", {{"avg", p.utterances_avg}, {"total", p.utterances_total}}},
            {"tokens", {{"avg", p.tokens_avg}, {"total", p.tokens_total}}},
            {"duration_sec", {{"avg", p.duration_avg}, {"total", p.duration_total}}},
            {"roles", {{"avg", p.roles_avg}, {"total", p.roles_total}}}};
      }
    }
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  out << render_stats_table(stats);
  if (published) {
    out << "\nPublished MultiTalk figures (token rule unknown, so token totals may not be comparable):\n";
    char buf[200];
    for (const auto& [lang, s] : stats.per_language) {
      const PublishedLanguageStats p = published_multitalk_stats(lang);
      std::snprintf(buf, sizeof buf,
                    "  %s utterances %.2f/%zu  tokens %.2f/%zu  duration %.2f/%.2f  roles %.2f/%zu\n",
                    std::string(to_string(lang)).c_str(), p.utterances_avg, p.utterances_total,
                    p.tokens_avg, p.tokens_total, p.duration_avg, p.duration_total, p.roles_avg,
                    p.roles_total);
      out << buf;
    }
  }
  return kExitOk;
}

struct VariantRow {
  std::map<Language, std::vector<TranscriptPair>> pairs;
  std::map<RatingMetric, std::vector<double>> ratings;
  std::vector<double> predicted;
  std::size_t dialogues = 0;
};

std::string fmt_fixed(double v, int decimals) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << v;
  return s.str();
}

int cmd_evaluate(const Globals& g, const std::string& manifest, const std::string& transcripts,
                 const std::string& ratings, bool use_predictor,
                 std::optional<double> mock_predictor, bool as_json, std::ostream& out,
                 spdlog::logger& log) {
  if (transcripts.empty() && ratings.empty() && !use_predictor && !mock_predictor) {
    throw ConfigError("evaluate needs --transcripts, --ratings, --predictor or --mock-predictor");
  }
  std::optional<RunConfig> config;
  if (!g.config.empty()) config = effective_config(g);
  const fs::path path = manifest_arg(manifest, g, config ? &*config : nullptr);
  const auto records = load_corpus(path, use_predictor || mock_predictor.has_value());

  std::map<std::string, const DialogueRecord*> by_id;
  std::map<std::string, VariantRow> rows;
  for (const auto& r : records) {
    by_id[r.dialogue_id] = &r;
    ++rows[r.provenance.variant].dialogues;
  }

  if (!transcripts.empty()) {
    for (const TranscriptLine& line : parse_transcripts(read_text_file(transcripts))) {
      auto it = by_id.find(line.dialogue_id);
      if (it == by_id.end()) {
        throw ParseError("unknown dialogue " + line.dialogue_id, line.line);
      }
      const DialogueRecord& r = *it->second;
      const RecordUtterance* u = nullptr;
      for (const auto& cand : r.utterances) {
        if (cand.index == line.utterance_index) u = &cand;
      }
      if (!u) {
        throw ParseError("dialogue " + line.dialogue_id + " has no utterance " +
                             std::to_string(line.utterance_index),
                         line.line);
      }
      rows[r.provenance.variant].pairs[r.language].push_back({u->stripped_text, line.hypothesis, r.language});
    }
  }
  if (!ratings.empty()) {
    for (const auto& [metric, sheet] : parse_ratings(read_text_file(ratings))) {
      for (std::size_t i = 0; i < sheet.items.size(); ++i) {
        auto it = by_id.find(sheet.items[i].dialogue_id);
        if (it == by_id.end()) {
          throw ValidationError("ratings reference unknown dialogue " + sheet.items[i].dialogue_id);
        }
        rows[it->second->provenance.variant].ratings[metric].push_back(sheet.items[i].score);
      }
    }
  }
  if (use_predictor || mock_predictor) {
    std::unique_ptr<ScorePredictor> predictor;
    if (mock_predictor) {
      predictor = std::make_unique<CannedPredictor>(std::vector<double>{*mock_predictor});
    } else {
      if (!config || !config->backends.predictor) {
        throw ConfigError("--predictor needs backends.predictor in --config");
      }
      predictor = std::make_unique<HttpPredictor>(*config->backends.predictor);
    }
    for (const auto& r : records) {
      const AudioSegment audio = decode_wav(read_binary_file(path.parent_path() / r.dialogue_audio_path));
      rows[r.provenance.variant].predicted.push_back(score_with_predictor(*predictor, audio));
    }
  }

  const RatingMetric metrics[] = {RatingMetric::kMOS, RatingMetric::kEMOS, RatingMetric::kTMOS,
                                  RatingMetric::kNaturalness, RatingMetric::kEmotiveness};
  json doc = {{"normalization_version", std::string(kNormalizationVersion)}, {"variants", json::object()}};
  std::vector<std::string> header{"variant", "dialogues"};
  std::vector<std::vector<std::string>> table;
  bool any_lang[2] = {false, false};
  std::set<RatingMetric> used_metrics;
  for (const auto& [label, row] : rows) {
    for (const auto& [lang, pairs] : row.pairs) any_lang[lang == Language::kCN] |= !pairs.empty();
    for (const auto& [m, scores] : row.ratings) used_metrics.insert(m);
  }
  if (any_lang[0]) header.push_back("WER(%)");
  if (any_lang[1]) header.push_back("CER(%)");
  for (RatingMetric m : metrics) {
    if (used_metrics.count(m)) header.push_back(std::string(to_string(m)));
  }
  const bool predicted = use_predictor || mock_predictor;
  if (predicted) header.push_back("predicted");

  for (const auto& [label, row] : rows) {
    json& v = doc["variants"][label];
    v["dialogues"] = row.dialogues;
    std::vector<std::string> cells{label, std::to_string(row.dialogues)};
    for (Language lang : {Language::kEN, Language::kCN}) {
      if (!any_lang[lang == Language::kCN]) continue;
      auto it = row.pairs.find(lang);
      if (it == row.pairs.end() || it->second.empty()) {
        cells.push_back("-");
        continue;
      }
      const double rate = corpus_error_rate(it->second);
      v[lang == Language::kEN ? "wer_percent" : "cer_percent"] = rate;
      cells.push_back(fmt_fixed(rate, 2));
    }
    for (RatingMetric m : metrics) {
      if (!used_metrics.count(m)) continue;
      auto it = row.ratings.find(m);
      if (it == row.ratings.end()) {
        cells.push_back("-");
        continue;
      }
      const AggregateScore a = aggregate(it->second);
      v[std::string(to_string(m))] = {{"mean", a.mean}, {"dispersion", a.dispersion}, {"n", a.n}};
      cells.push_back(fmt_fixed(a.mean, 2) + "±" + fmt_fixed(a.dispersion, 3));
    }
    if (predicted) {
      if (row.predicted.empty()) {
        cells.push_back("-");
      } else {
        const AggregateScore a = aggregate(row.predicted);
        v["predicted"] = {{"mean", a.mean}, {"n", a.n}, {"scored", "dialogue.wav"}};
        cells.push_back(fmt_fixed(a.mean, 2));
      }
    }
    table.push_back(std::move(cells));
  }
  log.debug("evaluated {} record(s) across {} variant(s)", records.size(), rows.size());

  if (as_json) {
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  std::vector<std::size_t> width(header.size());
  auto display_width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  for (std::size_t i = 0; i < header.size(); ++i) {
    width[i] = display_width(header[i]);
    for (const auto& cells : table) width[i] = std::max(width[i], display_width(cells[i]));
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << cells[i] << std::string(width[i] - display_width(cells[i]) + (i + 1 < cells.size() ? 2 : 0), ' ');
    }
    out << '\n';
  };
  out << "normalization " << kNormalizationVersion << '\n';
  if (predicted) out << "predicted: one score per assembled dialogue.wav\n";
  emit(header);
  for (const auto& cells : table) emit(cells);
  return kExitOk;
}

int cmd_validate(const Globals& g, const std::string& pool_path, const std::string& manifest,
                 bool no_audio_check, std::ostream& out) {
  if (pool_path.empty() && manifest.empty()) throw ConfigError("validate needs --pool or --manifest");
  std::vector<Violation> violations;
  if (!pool_path.empty()) {
    try {
      const fs::path p(pool_path);
      const CharacterPool pool = parse_pool(read_text_file(p), p.parent_path());
      auto v = validate_pool(pool, PoolValidationOptions{!no_audio_check});
      violations.insert(violations.end(), v.begin(), v.end());
    } catch (const ParseError& e) {
      violations.push_back({"PARSE_ERROR", pool_path, e.what()});
    }
  }
  if (!manifest.empty()) {
    auto v = validate_corpus(manifest_arg(manifest, g, nullptr));
    violations.insert(violations.end(), v.begin(), v.end());
  }
  for (const Violation& v : violations) {
    out << v.code << ' ' << v.subject << ": " << v.message << '\n';
  }
  return violations.empty() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* stop) {
  CLI::App app{"Multi-party dialogue speech dataset generator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_flag("--mock", g.mock, "Use the deterministic offline backends");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--parallelism", g.parallelism, "Concurrent runs")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  auto* gen = app.add_subcommand("generate", "Run the pipeline and write a corpus");
  std::optional<std::size_t> dialogues;
  gen->add_option("--dialogues", dialogues, "Override the dialogue count");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_manifest;
  bool stats_json = false, stats_no_audio = false, stats_published = false;
  stats->add_option("--manifest", stats_manifest, "manifest.jsonl");
  stats->add_flag("--json", stats_json, "Machine-readable output");
  stats->add_flag("--no-audio-check", stats_no_audio, "Skip checking audio files exist");
  stats->add_flag("--published", stats_published, "Show the published MultiTalk figures alongside");

  auto* eval = app.add_subcommand("evaluate", "WER/CER, rating aggregates and predictor scores");
  std::string eval_manifest, eval_transcripts, eval_ratings;
  bool eval_predictor = false, eval_json = false;
  std::optional<double> eval_mock_predictor;
  eval->add_option("--manifest", eval_manifest, "manifest.jsonl");
  eval->add_option("--transcripts", eval_transcripts, "TSV: dialogue_id, utterance index, hypothesis");
  eval->add_option("--ratings", eval_ratings, "JSON rating items");
  eval->add_flag("--predictor", eval_predictor, "Score dialogue audio with backends.predictor");
  eval->add_option("--mock-predictor", eval_mock_predictor, "Constant predictor score");
  eval->add_flag("--json", eval_json, "Machine-readable output");

  auto* val = app.add_subcommand("validate", "Check a pool or a corpus");
  std::string val_pool, val_manifest;
  bool val_no_audio = false;
  val->add_option("--pool", val_pool, "Character pool JSON");
  val->add_option("--manifest", val_manifest, "manifest.jsonl");
  val->add_flag("--no-audio-check", val_no_audio, "Skip reference/audio file checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  auto log = make_logger(err, g.log_level);
  try {
    if (gen->parsed()) return cmd_generate(g, dialogues, out, *log, stop);
    if (stats->parsed())
      return cmd_stats(g, stats_manifest, stats_json, stats_no_audio, stats_published, out);
    if (eval->parsed())
      return cmd_evaluate(g, eval_manifest, eval_transcripts, eval_ratings, eval_predictor,
                          eval_mock_predictor, eval_json, out, *log);
    if (val->parsed()) return cmd_validate(g, val_pool, val_manifest, val_no_audio, out);
  } catch (const ConfigError& e) {
    log->error("config: {}", e.what());
    return kExitConfig;
  } catch (const DuplicateIdError& e) {
    log->error("{}: {}", e.kind(), e.what());
    return kExitConfig;
  } catch (const BackendError& e) {
    log->error("{}: {}", e.kind(), e.what());
    return kExitBackend;
  } catch (const Error& e) {
    log->error("{}: {}", e.kind(), e.what());
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace dsynth
