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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsynth/audio.hpp"
#include "dsynth/character_pool.hpp"
#include "dsynth/script.hpp"

namespace dsynth {

struct GenerationParams {
  double temperature = 0.8;
  int max_tokens = 2048;
  std::optional<std::uint64_t> seed;
};

enum class Criterion { kNaturalness, kClarityEmotiveness };

std::string_view to_string(Criterion criterion);
std::optional<Criterion> parse_criterion(std::string_view text);

struct UtteranceFeedback {
  std::size_t index = 0;
  std::string suggestion;
  std::vector<Criterion> criteria;  // sorted, unique

  bool operator==(const UtteranceFeedback&) const = default;
};

struct CritiqueFeedback {
  std::vector<UtteranceFeedback> per_utterance;
  std::optional<std::string> global_notes;

  bool flags(std::size_t index) const;
  bool operator==(const CritiqueFeedback&) const = default;
};

// Everything the writer sees for one pass. prior_script and prior_feedback
// are both set (revision) or both empty (initial draft).
struct WriterRequest {
  std::string system_prompt;
  std::string pool_digest;
  std::vector<std::string> participant_ids;
  std::vector<std::string> participant_names;
  Language language = Language::kEN;
  std::optional<std::string> topic;
  std::optional<DialogueScript> prior_script;
  std::optional<CritiqueFeedback> prior_feedback;
  bool self_refine = false;
  // Appended after a malformed reply to steer the retry.
  std::optional<std::string> corrective_note;
  GenerationParams params;

  // The user message sent alongside system_prompt.
  std::string user_message() const;
  int next_iteration_index() const {
    return prior_script ? prior_script->iteration_index + 1 : 0;
  }
};

struct WriterPromptOptions {
  std::optional<std::string> topic;
  bool self_refine = false;
  GenerationParams params;
};

// Fixed instruction texts (writer requirements, refinement instructions,
// critic criteria) and the reply-format appendices.
std::string writer_base_prompt(const std::vector<std::string>& participant_names);
std::string build_critic_prompt();

// Renders each participant's profile fields, extra keys and relations.
std::string render_pool_digest(const std::vector<Character>& participants);

// Throws ValidationError unless there are at least two participants sharing
// one language, and when only one of prior script / feedback is given.
WriterRequest build_writer_prompt(
    const std::vector<Character>& participants,
    const std::optional<std::pair<DialogueScript, CritiqueFeedback>>& prior,
    const WriterPromptOptions& options = {});

struct SynthesisRequest {
  std::size_t utterance_index = 0;
  std::string speaker_id;
  std::string text;           // raw text, markup included
  std::string stripped_text;  // markup removed
  std::vector<std::uint8_t> reference_audio;
  Language language = Language::kEN;
};

struct SynthesizedSegment {
  std::size_t utterance_index = 0;
  AudioSegment audio;

  double duration() const { return audio.duration(); }
  int sample_rate() const { return audio.sample_rate; }
  std::vector<std::uint8_t> wav_bytes() const { return encode_wav(audio); }
};

struct SynthesisResult {
  std::vector<SynthesizedSegment> segments;
  std::string backend_id;

  std::vector<AudioSegment> audio() const;
};

struct ReviewClip {
  std::size_t utterance_index = 0;
  std::string speaker_id;
  std::string transcript;
  std::vector<std::uint8_t> wav;
};

struct CritiqueRequest {
  std::string prompt;
  DialogueScript script;
  std::vector<ReviewClip> clips;  // dialogue order
};

class WriterBackend {
 public:
  virtual ~WriterBackend() = default;
  virtual std::string id() const = 0;
  // Raw reply text; parsed by write_script.
  virtual std::string generate(const WriterRequest& request) = 0;
};

class SynthesizerBackend {
 public:
  virtual ~SynthesizerBackend() = default;
  virtual std::string id() const = 0;
  // WAV bytes for one utterance.
  virtual std::vector<std::uint8_t> synthesize(const SynthesisRequest& request) = 0;
};

class CriticBackend {
 public:
  virtual ~CriticBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string review(const CritiqueRequest& request) = 0;
};

// Extracts the body of the first ```-fenced block (an optional language tag
// after the opening fence is skipped). Returns nullopt if there is none.
std::optional<std::string> extract_fenced_block(std::string_view text);

// Writer reply: fenced JSON array of {speaker, text}. speaker may be a
// participant id or display name. Throws MalformedOutputError.
DialogueScript parse_writer_reply(std::string_view reply, const WriterRequest& request,
                                  const MarkupConfig& markup = {});

// Critic reply: fenced JSON array of {index, suggestion, criteria}. Indices
// must address utterances of a script of `utterance_count` lines.
CritiqueFeedback parse_critic_reply(std::string_view reply, std::size_t utterance_count);

std::string render_writer_reply(const DialogueScript& script);
std::string render_critic_reply(const CritiqueFeedback& feedback);

// Calls the writer and returns a script that passes validate_script against
// `pool`; anything else is a MalformedOutputError.
DialogueScript write_script(WriterBackend& backend, const WriterRequest& request,
                            const CharacterPool& pool, const ScriptBounds& bounds = {},
                            const MarkupConfig& markup = {});

// One backend call per utterance, in order; all-or-nothing. Throws
// BackendError naming the failing utterance index.
SynthesisResult synthesize(SynthesizerBackend& backend, const DialogueScript& script,
                           const CharacterPool& pool);

CritiqueFeedback critique(CriticBackend& backend, const SynthesisResult& dialogue,
                          const DialogueScript& script);

}  // namespace dsynth
