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

#include "dsynth/script.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "dsynth/serialization.hpp"
#include "json.hpp"

namespace dsynth {

using nlohmann::json;

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool is_emotion_label(std::string_view identifier) {
  if (identifier.empty() ||
      !std::isupper(static_cast<unsigned char>(identifier.front()))) {
    return false;
  }
  return std::all_of(identifier.begin(), identifier.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-' || c == ' ';
  });
}

namespace {

// Finds "[ident]" at `pos`; returns the identifier and the position one past
// the closing bracket.
std::optional<std::pair<std::string_view, std::size_t>> bracket_at(
    std::string_view text, std::size_t pos) {
  if (pos >= text.size() || text[pos] != '[') return std::nullopt;
  for (std::size_t end = pos + 1; end < text.size(); ++end) {
    if (text[end] == '[' || text[end] == '\n') return std::nullopt;
    if (text[end] == ']') {
      return std::make_pair(text.substr(pos + 1, end - pos - 1), end + 1);
    }
  }
  return std::nullopt;
}

bool is_pause(std::string_view ident, const MarkupConfig& config) {
  return config.pause_vocabulary.count(std::string(ident)) > 0;
}

}  // namespace

ParsedMarkup parse_markup(std::string_view raw_text, const MarkupConfig& config) {
  ParsedMarkup out;
  std::string_view body = trim(raw_text);

  if (!body.empty() && body.back() == ']') {
    const std::size_t open = body.rfind('[');
    if (open != std::string_view::npos) {
      std::string_view ident = body.substr(open + 1, body.size() - open - 2);
      if (is_emotion_label(ident) && !is_pause(ident, config)) {
        out.emotion_label = std::string(ident);
        body = trim(body.substr(0, open));
      }
    }
  }

  std::string pending;
  bool in_emphasis = false;
  auto flush_plain = [&] {
    std::string text = collapse_whitespace(pending);
    pending.clear();
    if (text.empty()) return;
    if (!out.segments.empty()) {
      if (auto* prev = std::get_if<PlainText>(&out.segments.back())) {
        prev->text += " " + text;
        return;
      }
    }
    out.segments.push_back(PlainText{std::move(text)});
  };

  const std::string_view open_tag = config.emphasis_open;
  const std::string_view close_tag = config.emphasis_close;
  std::size_t i = 0;
  while (i < body.size()) {
    std::string_view rest = body.substr(i);
    if (!open_tag.empty() && rest.starts_with(open_tag)) {
      if (in_emphasis) throw MarkupError("nested emphasis tag in: " + std::string(raw_text));
      flush_plain();
      in_emphasis = true;
      i += open_tag.size();
      continue;
    }
    if (!close_tag.empty() && rest.starts_with(close_tag)) {
      if (!in_emphasis) {
        throw MarkupError("closing emphasis tag without opening tag in: " +
                          std::string(raw_text));
      }
      out.segments.push_back(EmphasisSpan{collapse_whitespace(pending)});
      pending.clear();
      in_emphasis = false;
      i += close_tag.size();
      continue;
    }
    if (auto bracket = bracket_at(body, i)) {
      auto [ident, next] = *bracket;
      if (is_pause(ident, config)) {
        if (in_emphasis) {
          throw MarkupError("pause token inside emphasis in: " + std::string(raw_text));
        }
        flush_plain();
        out.segments.push_back(PauseToken{std::string(ident)});
      } else {
        out.warnings.push_back(
            (is_emotion_label(ident) ? "emotion label in non-trailing position: ["
                                     : "unknown bracketed token: [") +
            std::string(ident) + "]");
        pending.append(body.substr(i, next - i));
      }
      i = next;
      continue;
    }
    pending.push_back(body[i]);
    ++i;
  }
  if (in_emphasis) {
    throw MarkupError("unbalanced emphasis tag in: " + std::string(raw_text));
  }
  flush_plain();
  return out;
}

std::string render_markup(const std::vector<Segment>& segments,
                          const std::optional<std::string>& emotion_label,
                          const MarkupConfig& config) {
  std::string out;
  auto append = [&out](std::string_view piece) {
    if (!out.empty()) out.push_back(' ');
    out.append(piece);
  };
  for (const Segment& segment : segments) {
    if (const auto* plain = std::get_if<PlainText>(&segment)) {
      append(plain->text);
    } else if (const auto* emph = std::get_if<EmphasisSpan>(&segment)) {
      append(config.emphasis_open + emph->text + config.emphasis_close);
    } else {
      append("[" + std::get<PauseToken>(segment).kind + "]");
    }
  }
  if (emotion_label) append("[" + *emotion_label + "]");
  return out;
}

std::string normalize_markup_whitespace(std::string_view raw_text,
                                        const MarkupConfig& config) {
  const std::string collapsed = collapse_whitespace(raw_text);
  const std::string_view text = collapsed;
  std::string out;
  auto tag_length = [&](std::size_t pos) -> std::size_t {
    std::string_view rest = text.substr(pos);
    if (!config.emphasis_open.empty() && rest.starts_with(config.emphasis_open)) {
      return config.emphasis_open.size();
    }
    if (!config.emphasis_close.empty() && rest.starts_with(config.emphasis_close)) {
      return config.emphasis_close.size();
    }
    if (auto bracket = bracket_at(text, pos)) return bracket->second - pos;
    return 0;
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::size_t len = tag_length(i)) {
      if (!out.empty() && out.back() == ' ') out.pop_back();
      out.append(text.substr(i, len));
      i += len;
      while (i < text.size() && text[i] == ' ') ++i;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

bool Utterance::has_pause() const {
  return std::any_of(segments.begin(), segments.end(), [](const Segment& s) {
    return std::holds_alternative<PauseToken>(s);
  });
}

Utterance make_utterance(std::string speaker_id, std::string raw_text,
                         std::size_t index, const MarkupConfig& config) {
  ParsedMarkup parsed = parse_markup(raw_text, config);
  Utterance u;
  u.speaker_id = std::move(speaker_id);
  u.raw_text = std::move(raw_text);
  u.segments = std::move(parsed.segments);
  u.emotion_label = std::move(parsed.emotion_label);
  u.index = index;
  u.warnings = std::move(parsed.warnings);
  return u;
}

std::string strip_markup(const Utterance& utterance) {
  std::string joined;
  for (const Segment& segment : utterance.segments) {
    std::string_view text;
    if (const auto* plain = std::get_if<PlainText>(&segment)) {
      text = plain->text;
    } else if (const auto* emph = std::get_if<EmphasisSpan>(&segment)) {
      text = emph->text;
    } else {
      continue;
    }
    if (!joined.empty()) joined.push_back(' ');
    joined.append(text);
  }
  return collapse_whitespace(joined);
}

std::vector<Violation> validate_script(const DialogueScript& script,
                                       const CharacterPool& pool,
                                       const ScriptBounds& bounds) {
  std::vector<Violation> out;
  const std::size_t m = script.utterances.size();
  if (script.iteration_index < 0) {
    out.push_back({std::string(script_codes::kNegativeIteration), "",
                   "iteration_index is negative"});
  }
  if (m < bounds.min_utterances) {
    out.push_back({std::string(script_codes::kTooFewUtterances), "",
                   "script has " + std::to_string(m) + " utterance(s); minimum is " +
                       std::to_string(bounds.min_utterances)});
  }
  if (m > bounds.max_utterances) {
    out.push_back({std::string(script_codes::kTooManyUtterances), "",
                   "script has " + std::to_string(m) + " utterances; maximum is " +
                       std::to_string(bounds.max_utterances)});
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (script.utterances[j].index != j) {
      out.push_back({std::string(script_codes::kBadIndex),
                     script.utterances[j].speaker_id,
                     "utterance at position " + std::to_string(j) +
                         " carries index " +
                         std::to_string(script.utterances[j].index)});
    }
  }

  std::vector<std::string> ids = script.participants;
  for (const Utterance& u : script.utterances) {
    if (std::find(ids.begin(), ids.end(), u.speaker_id) == ids.end()) {
      ids.push_back(u.speaker_id);
    }
  }
  for (const std::string& id : ids) {
    const Character* c = pool.find(id);
    if (!c) {
      out.push_back({std::string(script_codes::kUnknownSpeaker), id,
                     "speaker '" + id + "' is not in the character pool"});
    } else if (c->language != script.language) {
      out.push_back({std::string(script_codes::kLanguageMismatch), id,
                     "speaker '" + id + "' has language " +
                         std::string(to_string(c->language)) + ", script is " +
                         std::string(to_string(script.language))});
    }
  }

  std::set<std::string> outsiders;  // one violation per speaker, not per line
  for (const Utterance& u : script.utterances) {
    if (std::find(script.participants.begin(), script.participants.end(),
                  u.speaker_id) == script.participants.end() &&
        outsiders.insert(u.speaker_id).second) {
      out.push_back({std::string(script_codes::kSpeakerNotParticipant),
                     u.speaker_id,
                     "utterance " + std::to_string(u.index) + " speaker '" +
                         u.speaker_id + "' is not a listed participant"});
    }
  }
  for (const std::string& p : script.participants) {
    const bool speaks = std::any_of(
        script.utterances.begin(), script.utterances.end(),
        [&](const Utterance& u) { return u.speaker_id == p; });
    if (!speaks) {
      out.push_back({std::string(script_codes::kSilentParticipant), p,
                     "participant '" + p + "' never speaks"});
    }
  }
  return out;
}

std::string serialize_script(const DialogueScript& script) {
  return script_to_json(script).dump(2) + "\n";
}

DialogueScript parse_script(std::string_view json_text, const MarkupConfig& config) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("script is not valid JSON: ") + e.what());
  }
  return script_from_json(doc, config);
}

}  // namespace dsynth
