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

#include "dsynth/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dsynth/audio.hpp"
#include "dsynth/evaluation.hpp"
#include "dsynth/io.hpp"
#include "dsynth/serialization.hpp"

namespace dsynth {

namespace fs = std::filesystem;
using nlohmann::json;

json record_to_json(const DialogueRecord& r) {
  json utterances = json::array();
  for (const RecordUtterance& u : r.utterances) {
    utterances.push_back({{"index", u.index},
                          {"speaker_id", u.speaker_id},
                          {"raw_text", u.raw_text},
                          {"stripped_text", u.stripped_text},
                          {"emotion_label", u.emotion_label ? json(*u.emotion_label) : json(nullptr)},
                          {"audio_path", u.audio_path},
                          {"duration", u.duration}});
  }
  const Provenance& p = r.provenance;
  return {{"dialogue_id", r.dialogue_id},
          {"language", std::string(to_string(r.language))},
          {"topic_tag", r.topic_tag ? json(*r.topic_tag) : json(nullptr)},
          {"participants", r.participants},
          {"utterances", std::move(utterances)},
          {"dialogue_audio_path", r.dialogue_audio_path},
          {"total_duration", r.total_duration},
          {"provenance", {{"variant", p.variant},
                          {"loops", p.loops},
                          {"seed", p.seed},
                          {"ordinal", p.ordinal},
                          {"gap_seconds", p.gap_seconds},
                          {"sample_rate", p.sample_rate},
                          {"backend_ids", p.backend_ids},
                          {"history", p.history}}}};
}

DialogueRecord record_from_json(const json& doc) {
  DialogueRecord r;
  r.dialogue_id = doc.at("dialogue_id").get<std::string>();
  auto lang = parse_language(doc.at("language").get<std::string>());
  if (!lang) throw ParseError("unsupported language in record " + r.dialogue_id);
  r.language = *lang;
  if (doc.at("topic_tag").is_string()) r.topic_tag = doc["topic_tag"].get<std::string>();
  r.participants = doc.at("participants").get<std::vector<std::string>>();
  for (const json& u : doc.at("utterances")) {
    RecordUtterance ru;
    ru.index = u.at("index").get<std::size_t>();
    ru.speaker_id = u.at("speaker_id").get<std::string>();
    ru.raw_text = u.at("raw_text").get<std::string>();
    ru.stripped_text = u.at("stripped_text").get<std::string>();
    if (u.at("emotion_label").is_string()) ru.emotion_label = u["emotion_label"].get<std::string>();
    ru.audio_path = u.at("audio_path").get<std::string>();
    ru.duration = u.at("duration").get<double>();
    r.utterances.push_back(std::move(ru));
  }
  r.dialogue_audio_path = doc.at("dialogue_audio_path").get<std::string>();
  r.total_duration = doc.at("total_duration").get<double>();
  const json& p = doc.at("provenance");
  r.provenance.variant = p.at("variant").get<std::string>();
  r.provenance.loops = p.at("loops").get<int>();
  r.provenance.seed = p.at("seed").get<std::uint64_t>();
  r.provenance.ordinal = p.at("ordinal").get<std::size_t>();
  r.provenance.gap_seconds = p.at("gap_seconds").get<double>();
  r.provenance.sample_rate = p.at("sample_rate").get<int>();
  r.provenance.backend_ids = p.at("backend_ids").get<std::map<std::string, std::string>>();
  r.provenance.history = p.at("history").get<std::vector<std::string>>();
  return r;
}

namespace {

std::string read_existing(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return read_text_file(path);
}

std::set<std::string> manifest_ids(const std::string& content) {
  std::set<std::string> ids;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      ids.insert(json::parse(line).at("dialogue_id").get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(std::string("existing manifest is malformed: ") + e.what(), line_no);
    }
  }
  return ids;
}

std::string relative(const std::string& a, const std::string& b) { return a + "/" + b; }

std::vector<std::string> write_history(const PipelineRun& run, const fs::path& root,
                                       const CorpusWriteOptions& options) {
  std::vector<std::string> written;
  const std::string base = "history/" + run.run_id;
  auto put = [&](const std::string& name, std::string_view text) {
    write_file_atomic(root / base / name, text);
    written.push_back(relative(base, name));
  };

  json config = pipeline_config_to_json(run.config);
  config["seed"] = run.seed;
  config["ordinal"] = run.ordinal;
  put("config.json", config.dump(2) + "\n");
  put("run.json", run_summary_to_json(run, false).dump(2) + "\n");

  json timing = json::array();
  for (const IterationRecord& rec : run.iterations) {
    timing.push_back({{"t", rec.t},
                      {"write", rec.wall_time.write},
                      {"synthesize", rec.wall_time.synthesize},
                      {"critique", rec.wall_time.critique}});
  }
  write_file_atomic(root / base / "timing.json", timing.dump(2) + "\n");

  for (const IterationRecord& rec : run.iterations) {
    const std::string prefix = "t" + std::to_string(rec.t);
    put(prefix + "_script.json", script_to_json(rec.script).dump(2) + "\n");
    put(prefix + "_writer_request.json", writer_request_to_json(rec.writer_request).dump(2) + "\n");
    if (rec.feedback) put(prefix + "_feedback.json", feedback_to_json(*rec.feedback).dump(2) + "\n");
    if (options.history_audio) {
      for (const SynthesizedSegment& seg : rec.synthesis.segments) {
        const std::string name =
            prefix + "_audio/utt_" + std::to_string(seg.utterance_index) + ".wav";
        write_file_atomic(root / base / name, seg.wav_bytes());
        written.push_back(relative(base, name));
      }
    }
  }
  return written;
}

DialogueRecord write_dialogue(const PipelineRun& run, const fs::path& root,
                              std::vector<std::string> history) {
  const IterationRecord& last = run.final();
  const int rate = run.config.sample_rate;
  const std::string base = "audio/" + run.run_id;

  DialogueRecord rec;
  rec.dialogue_id = run.run_id;
  rec.language = last.script.language;
  rec.topic_tag = last.script.topic_tag;
  rec.participants = last.script.participants;

  for (std::size_t i = 0; i < last.script.utterances.size(); ++i) {
    const Utterance& u = last.script.utterances[i];
    const AudioSegment audio = resample_linear(last.synthesis.segments[i].audio, rate);
    RecordUtterance ru;
    ru.index = u.index;
    ru.speaker_id = u.speaker_id;
    ru.raw_text = u.raw_text;
    ru.stripped_text = strip_markup(u);
    ru.emotion_label = u.emotion_label;
    ru.audio_path = relative(base, "utt_" + std::to_string(u.index) + ".wav");
    ru.duration = audio.duration();
    write_file_atomic(root / ru.audio_path, encode_wav(audio));
    rec.utterances.push_back(std::move(ru));
  }

  const auto segments = last.synthesis.audio();
  const DialogueAudio dialogue = assemble_dialogue(segments, run.config.gap_seconds, rate);
  rec.dialogue_audio_path = relative(base, "dialogue.wav");
  write_file_atomic(root / rec.dialogue_audio_path, encode_wav(dialogue.waveform, rate));
  rec.total_duration = total_duration(dialogue);

  Provenance& p = rec.provenance;
  p.variant = run.config.variant.label();
  p.loops = run.config.variant.loops;
  p.seed = run.seed;
  p.ordinal = run.ordinal;
  p.gap_seconds = run.config.gap_seconds;
  p.sample_rate = rate;
  p.backend_ids = run.backend_ids;
  p.history = std::move(history);
  return rec;
}

}  // namespace

CorpusWriteResult write_corpus(std::span<const PipelineRun> runs, const fs::path& out_dir,
                               const CorpusWriteOptions& options) {
  CorpusWriteResult result;
  result.manifest = out_dir / "manifest.jsonl";
  std::string manifest = read_existing(result.manifest);

  std::set<std::string> ids = manifest_ids(manifest);
  for (const PipelineRun& run : runs) {
    if (!ids.insert(run.run_id).second || fs::exists(out_dir / "audio" / run.run_id) ||
        fs::exists(out_dir / "history" / run.run_id)) {
      throw DuplicateIdError(run.run_id);
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  if (!fs::exists(result.manifest)) write_file_atomic(result.manifest, std::string_view{});

  for (const PipelineRun& run : runs) {
    if (run.status == RunStatus::kCancelled) {
      result.unfinished.push_back(run.run_id);
      continue;
    }
    auto history = write_history(run, out_dir, options);
    if (run.status != RunStatus::kCompleted || run.iterations.empty()) {
      result.unfinished.push_back(run.run_id);
      continue;
    }
    DialogueRecord rec = write_dialogue(run, out_dir, std::move(history));
    manifest += record_to_json(rec).dump() + "\n";
    write_file_atomic(result.manifest, manifest);
    result.records.push_back(std::move(rec));
  }
  return result;
}

namespace {

template <typename OnRecord, typename OnError>
void scan_manifest(const fs::path& manifest, OnRecord&& on_record, OnError&& on_error) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      on_record(record_from_json(json::parse(line)), line_no);
    } catch (const json::exception& e) {
      on_error(ParseError(std::string("malformed manifest record: ") + e.what(), line_no));
    } catch (const ParseError& e) {
      on_error(ParseError(e.what(), line_no));
    }
  }
}

std::vector<std::string> audio_paths(const DialogueRecord& r) {
  std::vector<std::string> paths;
  for (const auto& u : r.utterances) paths.push_back(u.audio_path);
  paths.push_back(r.dialogue_audio_path);
  return paths;
}

}  // namespace

std::vector<DialogueRecord> load_corpus(const fs::path& manifest, bool check_audio) {
  const fs::path root = manifest.parent_path();
  std::vector<DialogueRecord> records;
  scan_manifest(
      manifest,
      [&](DialogueRecord r, std::size_t) {
        if (check_audio) {
          for (const auto& p : audio_paths(r)) {
            if (!fs::exists(root / p)) throw MissingAudioError((root / p).string());
          }
        }
        records.push_back(std::move(r));
      },
      [](const ParseError& e) { throw e; });
  return records;
}

std::vector<Violation> validate_corpus(const fs::path& manifest) {
  const fs::path root = manifest.parent_path();
  std::vector<Violation> out;
  std::set<std::string> ids;
  scan_manifest(
      manifest,
      [&](const DialogueRecord& r, std::size_t line_no) {
        const std::string where = "line " + std::to_string(line_no);
        if (!ids.insert(r.dialogue_id).second) {
          out.push_back({"DUPLICATE_ID", r.dialogue_id, where + ": duplicate dialogue id"});
        }
        for (const auto& p : audio_paths(r)) {
          if (!fs::exists(root / p)) {
            out.push_back({"MissingAudio", r.dialogue_id, where + ": missing " + p});
          }
        }
        const double n = static_cast<double>(r.utterances.size());
        double expected = 0.0;
        for (const auto& u : r.utterances) expected += u.duration;
        const int rate = r.provenance.sample_rate > 0 ? r.provenance.sample_rate : kCanonicalSampleRate;
        expected += static_cast<double>(gap_sample_count(r.provenance.gap_seconds, rate)) / rate *
                    std::max(0.0, n - 1);
        if (std::abs(expected - r.total_duration) > n / rate + 1e-9) {
          out.push_back({"DURATION_MISMATCH", r.dialogue_id,
                         where + ": total_duration " + std::to_string(r.total_duration) +
                             " disagrees with utterance durations"});
        }
      },
      [&](const ParseError& e) { out.push_back({"PARSE_ERROR", "", e.what()}); });
  return out;
}

CorpusStats compute_stats(std::span<const DialogueRecord> records) {
  if (records.empty()) throw EmptyInputError("EmptyCorpus", "corpus has no dialogues");
  CorpusStats stats;
  std::map<Language, std::set<std::string>> speakers;
  std::map<Language, std::size_t> roles_sum;
  for (const DialogueRecord& r : records) {
    LanguageStats& s = stats.per_language[r.language];
    ++s.dialogues;
    s.utterances_total += r.utterances.size();
    std::set<std::string> in_dialogue;
    for (const RecordUtterance& u : r.utterances) {
      s.tokens_total += normalize_text(u.stripped_text, r.language).size();
      s.duration_total += u.duration;
      in_dialogue.insert(u.speaker_id);
      speakers[r.language].insert(u.speaker_id);
    }
    roles_sum[r.language] += in_dialogue.size();
    ++stats.topics[r.topic_tag ? *r.topic_tag : "(none)"];
  }
  for (auto& [lang, s] : stats.per_language) {
    const double d = static_cast<double>(s.dialogues);
    s.utterances_avg = static_cast<double>(s.utterances_total) / d;
    s.tokens_avg = static_cast<double>(s.tokens_total) / d;
    s.duration_avg = s.duration_total / d;
    s.roles_total = speakers[lang].size();
    s.roles_avg = static_cast<double>(roles_sum[lang]) / d;
  }
  return stats;
}

json stats_to_json(const CorpusStats& stats) {
  json langs = json::object();
  for (const auto& [lang, s] : stats.per_language) {
    langs[std::string(to_string(lang))] = {
        {"dialogues", s.dialogues},
        {"utterances", {{"avg", s.utterances_avg}, {"total", s.utterances_total}}},
        {"tokens", {{"avg", s.tokens_avg}, {"total", s.tokens_total}}},
        {"duration_sec", {{"avg", s.duration_avg}, {"total", s.duration_total}}},
        {"roles", {{"avg", s.roles_avg}, {"total", s.roles_total}}}};
  }
  return {{"languages", std::move(langs)},
          {"topics", stats.topics},
          {"normalization_version", std::string(kNormalizationVersion)},
          {"token_rule", "EN: normalized words; CN: normalized characters"}};
}

std::string render_stats_table(const CorpusStats& stats) {
  std::ostringstream out;
  char buf[160];
  out << "Tokens count EN normalized words and CN normalized characters ("
      << kNormalizationVersion << ").\n";
  std::snprintf(buf, sizeof buf, "%-16s", "Feature");
  out << buf;
  for (const auto& [lang, s] : stats.per_language) {
    std::snprintf(buf, sizeof buf, "%12s%14s", (std::string(to_string(lang)) + " AVG").c_str(),
                  (std::string(to_string(lang)) + " Total").c_str());
    out << buf;
  }
  out << "\n";
  auto row = [&](const char* name, auto avg, auto total, bool integral_total) {
    std::snprintf(buf, sizeof buf, "%-16s", name);
    out << buf;
    for (const auto& [lang, s] : stats.per_language) {
      if (integral_total) {
        std::snprintf(buf, sizeof buf, "%12.2f%14zu", avg(s), static_cast<std::size_t>(total(s)));
      } else {
        std::snprintf(buf, sizeof buf, "%12.2f%14.2f", avg(s), static_cast<double>(total(s)));
      }
      out << buf;
    }
    out << "\n";
  };
  std::snprintf(buf, sizeof buf, "%-16s", "Dialogues");
  out << buf;
  for (const auto& [lang, s] : stats.per_language) {
    std::snprintf(buf, sizeof buf, "%12s%14zu", "", s.dialogues);
    out << buf;
  }
  out << "\n";
  row("Utterances", [](const LanguageStats& s) { return s.utterances_avg; },
      [](const LanguageStats& s) { return s.utterances_total; }, true);
  row("Tokens", [](const LanguageStats& s) { return s.tokens_avg; },
      [](const LanguageStats& s) { return s.tokens_total; }, true);
  row("Duration (sec)", [](const LanguageStats& s) { return s.duration_avg; },
      [](const LanguageStats& s) { return s.duration_total; }, false);
  row("Roles", [](const LanguageStats& s) { return s.roles_avg; },
      [](const LanguageStats& s) { return s.roles_total; }, true);
  out << "\nTopics:\n";
  for (const auto& [topic, count] : stats.topics) {
    std::snprintf(buf, sizeof buf, "  %-28s%6zu\n", topic.c_str(), count);
    out << buf;
  }
  return out.str();
}

PublishedLanguageStats published_multitalk_stats(Language language) {
  if (language == Language::kCN) {
    return {4.81, 1950, 115.47, 57737, 28.17, 14085.73, 3.54, 15};
  }
  return {4.41, 2487, 86.07, 43036, 36.71, 18355.47, 3.06, 15};
}

}  // namespace dsynth
