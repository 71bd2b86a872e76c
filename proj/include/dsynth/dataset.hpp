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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsynth/error.hpp"
#include "dsynth/language.hpp"
#include "dsynth/orchestrator.hpp"
#include "json.hpp"

namespace dsynth {

struct RecordUtterance {
  std::size_t index = 0;
  std::string speaker_id;
  std::string raw_text;
  std::string stripped_text;
  std::optional<std::string> emotion_label;
  std::string audio_path;  // relative to the corpus root
  double duration = 0.0;

  bool operator==(const RecordUtterance&) const = default;
};

struct Provenance {
  std::string variant;  // PipelineVariant::label()
  int loops = 0;
  std::uint64_t seed = 0;
  std::size_t ordinal = 0;
  double gap_seconds = 0.0;
  int sample_rate = 0;
  std::map<std::string, std::string> backend_ids;
  std::vector<std::string> history;  // paths relative to the corpus root

  bool operator==(const Provenance&) const = default;
};

// One manifest line.
struct DialogueRecord {
  std::string dialogue_id;
  Language language = Language::kEN;
  std::optional<std::string> topic_tag;
  std::vector<std::string> participants;
  std::vector<RecordUtterance> utterances;
  std::string dialogue_audio_path;
  double total_duration = 0.0;
  Provenance provenance;

  bool operator==(const DialogueRecord&) const = default;
};

nlohmann::json record_to_json(const DialogueRecord& record);
DialogueRecord record_from_json(const nlohmann::json& doc);

struct CorpusWriteOptions {
  // Also keep every iteration's per-utterance WAVs under history/.
  bool history_audio = true;
};

struct CorpusWriteResult {
  std::filesystem::path manifest;
  std::vector<DialogueRecord> records;
  // Runs persisted under history/ only (failed or cancelled).
  std::vector<std::string> unfinished;
};

// Layout under out_dir:
//   manifest.jsonl                       one DialogueRecord per line
//   audio/<id>/utt_<index>.wav, dialogue.wav
//   history/<id>/config.json, run.json, t<t>_script.json, t<t>_feedback.json,
//                t<t>_writer_request.json, t<t>_audio/utt_<index>.wav
// Completed runs are appended to the manifest; failed runs get history only.
// Every file is written via temp file + rename. Throws DuplicateIdError before
// touching the directory if any run id is already present.
CorpusWriteResult write_corpus(std::span<const PipelineRun> runs,
                               const std::filesystem::path& out_dir,
                               const CorpusWriteOptions& options = {});

// Throws ParseError (with line number) or MissingAudioError.
std::vector<DialogueRecord> load_corpus(const std::filesystem::path& manifest,
                                        bool check_audio = true);

// Non-throwing corpus check for `validate`: parse errors, missing audio, and
// stored durations that disagree with the assembly arithmetic.
std::vector<Violation> validate_corpus(const std::filesystem::path& manifest);

struct LanguageStats {
  std::size_t dialogues = 0;
  std::size_t utterances_total = 0;
  double utterances_avg = 0.0;
  std::size_t tokens_total = 0;
  double tokens_avg = 0.0;
  double duration_total = 0.0;
  double duration_avg = 0.0;
  std::size_t roles_total = 0;  // distinct speakers in this language
  double roles_avg = 0.0;       // mean distinct speakers per dialogue

  bool operator==(const LanguageStats&) const = default;
};

struct CorpusStats {
  std::map<Language, LanguageStats> per_language;
  std::map<std::string, std::size_t> topics;  // untagged dialogues under "(none)"
};

// Tokens: EN normalized words, CN normalized characters of stripped_text.
// Durations: sum of stored per-utterance durations. Throws
// EmptyInputError("EmptyCorpus").
CorpusStats compute_stats(std::span<const DialogueRecord> records);

nlohmann::json stats_to_json(const CorpusStats& stats);
// Aligned CN/EN table with AVG and Total columns plus the topic distribution.
std::string render_stats_table(const CorpusStats& stats);

// Figures published for the released MultiTalk corpus, for side-by-side
// comparison in reports.
struct PublishedLanguageStats {
  double utterances_avg;
  std::size_t utterances_total;
  double tokens_avg;
  std::size_t tokens_total;
  double duration_avg;
  double duration_total;
  double roles_avg;
  std::size_t roles_total;
};
PublishedLanguageStats published_multitalk_stats(Language language);

}  // namespace dsynth
