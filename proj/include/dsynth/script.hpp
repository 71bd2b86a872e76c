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

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dsynth/character_pool.hpp"
#include "dsynth/error.hpp"
#include "dsynth/language.hpp"

namespace dsynth {

struct PlainText {
  std::string text;
  bool operator==(const PlainText&) const = default;
};

struct EmphasisSpan {
  std::string text;
  bool operator==(const EmphasisSpan&) const = default;
};

struct PauseToken {
  std::string kind;  // e.g. "breath"
  bool operator==(const PauseToken&) const = default;
};

using Segment = std::variant<PlainText, EmphasisSpan, PauseToken>;

// Closed vocabularies for paralinguistic markup. Emotion labels are open
// vocabulary: any trailing bracketed identifier starting with an uppercase
// letter.
struct MarkupConfig {
  std::set<std::string> pause_vocabulary{"breath"};
  std::string emphasis_open = "<strong>";
  std::string emphasis_close = "</strong>";
};

struct ParsedMarkup {
  std::vector<Segment> segments;
  std::optional<std::string> emotion_label;
  std::vector<std::string> warnings;
};

// Whitespace inside segment text is collapsed and trimmed. Unknown bracketed
// tokens stay in PlainText and produce a warning. Throws MarkupError on
// unbalanced or nested emphasis tags, or on pause tokens inside emphasis.
ParsedMarkup parse_markup(std::string_view raw_text,
                          const MarkupConfig& config = {});

// Canonical form: segments joined by single spaces, no padding inside tags,
// emotion label last.
std::string render_markup(const std::vector<Segment>& segments,
                          const std::optional<std::string>& emotion_label,
                          const MarkupConfig& config = {});

// Collapses whitespace runs, trims, and removes whitespace adjacent to markup
// tags. Two raw texts that normalize equal carry the same markup.
std::string normalize_markup_whitespace(std::string_view raw_text,
                                        const MarkupConfig& config = {});

// Collapses runs of ASCII whitespace to one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

bool is_emotion_label(std::string_view identifier);

struct Utterance {
  std::string speaker_id;
  std::string raw_text;
  std::vector<Segment> segments;
  std::optional<std::string> emotion_label;
  std::size_t index = 0;
  std::vector<std::string> warnings;

  bool has_pause() const;
};

Utterance make_utterance(std::string speaker_id, std::string raw_text,
                         std::size_t index, const MarkupConfig& config = {});

// Plain and emphasized text joined with single spaces; pauses and the emotion
// label dropped.
std::string strip_markup(const Utterance& utterance);

struct DialogueScript {
  std::vector<Utterance> utterances;
  std::vector<std::string> participants;
  Language language = Language::kEN;
  int iteration_index = 0;
  std::optional<std::string> topic_tag;
};

namespace script_codes {
inline constexpr std::string_view kUnknownSpeaker = "UNKNOWN_SPEAKER";
inline constexpr std::string_view kSpeakerNotParticipant = "SPEAKER_NOT_PARTICIPANT";
inline constexpr std::string_view kSilentParticipant = "SILENT_PARTICIPANT";
inline constexpr std::string_view kLanguageMismatch = "LANGUAGE_MISMATCH";
inline constexpr std::string_view kTooFewUtterances = "TOO_FEW_UTTERANCES";
inline constexpr std::string_view kTooManyUtterances = "TOO_MANY_UTTERANCES";
inline constexpr std::string_view kBadIndex = "BAD_UTTERANCE_INDEX";
inline constexpr std::string_view kNegativeIteration = "NEGATIVE_ITERATION";
}  // namespace script_codes

struct ScriptBounds {
  std::size_t min_utterances = 2;
  std::size_t max_utterances = 64;
};

std::vector<Violation> validate_script(const DialogueScript& script,
                                       const CharacterPool& pool,
                                       const ScriptBounds& bounds = {});

// {language, topic_tag, iteration_index, participants,
//  utterances: [{speaker_id, raw_text}]}. Segments are re-derived on load.
std::string serialize_script(const DialogueScript& script);
DialogueScript parse_script(std::string_view json_text,
                            const MarkupConfig& config = {});

}  // namespace dsynth
