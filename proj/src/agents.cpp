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

#include "dsynth/agents.hpp"

#include <algorithm>
#include <sstream>

#include "dsynth/error.hpp"
#include "dsynth/io.hpp"
#include "json.hpp"

namespace dsynth {

using nlohmann::json;

std::string_view to_string(Criterion criterion) {
  return criterion == Criterion::kNaturalness ? "naturalness" : "clarity_emotiveness";
}

std::optional<Criterion> parse_criterion(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "naturalness") return Criterion::kNaturalness;
  if (lower == "clarity_emotiveness" || lower == "clarity and emotiveness") {
    return Criterion::kClarityEmotiveness;
  }
  return std::nullopt;
}

bool CritiqueFeedback::flags(std::size_t index) const {
  return std::any_of(per_utterance.begin(), per_utterance.end(),
                     [&](const UtteranceFeedback& f) { return f.index == index; });
}

namespace {

constexpr std::string_view kWriterRequirements =
    "generate a conversation script meeting the below requirements:\n"
    "1. Character Interactions: Characters should express distinct viewpoints or "
    "goals, with the ability to interrupt, question, or support others.\n"
    "2. Natural Flow: Dialogue should resemble natural communication, avoiding "
    "mechanical or overly deliberate language.\n"
    "3. Topics and Content: Dialogues should cover diverse, realistic topics, "
    "aligning with the character's setting and thematic background.\n"
    "4. Emotional Dynamics: Incorporate emotional shifts to enhance expressiveness, "
    "using emotions such as happiness, anger, and sadness.\n";

constexpr std::string_view kMarkupGuide =
    "Markup: wrap an emphasized word as <strong>word</strong>, mark a pause as "
    "[breath], and end each utterance with exactly one emotion label in square "
    "brackets starting with a capital letter, for example [Curious].\n";

constexpr std::string_view kCriticRevision =
    "Revise the previous script using the feedback below. Modify the dialogue "
    "content where the feedback asks for it, and add suitable paralinguistic "
    "tokens and emotional labels to each utterance.\n";

constexpr std::string_view kSelfRevision =
    "Review the previous script yourself and improve it to enhance the "
    "naturalness and emotional content of the dialogue, and add suitable "
    "paralinguistic tokens and emotional labels to each utterance.\n";

constexpr std::string_view kWriterFormat =
    "Reply with the script only, as one fenced block:\n"
    "```json\n"
    "[{\"speaker\": \"<character id>\", \"text\": \"<utterance>\"}]\n"
    "```\n";

constexpr std::string_view kCriticPrompt =
    "Please listen to this conversation sentence by sentence, evaluate each "
    "sentence based on the following criteria, and provide improvement "
    "suggestions:\n"
    "1. Naturalness: Assess the smoothness and intonation, ensuring it matches "
    "the context with seamless transitions.\n"
    "2. Clarity and Emotiveness: Ensure the sentence is clear, with no vague "
    "terms, and that emotional expression in the dialogue is sufficient and "
    "appropriate.\n";

constexpr std::string_view kCriticFormat =
    "Sentences are numbered from 0 in dialogue order. Reply only with one fenced "
    "block listing the sentences that need improvement:\n"
    "```json\n"
    "[{\"index\": 0, \"suggestion\": \"<what to change>\", \"criteria\": "
    "[\"naturalness\", \"clarity_emotiveness\"]}]\n"
    "```\n"
    "Reply with an empty array if no sentence needs improvement.\n";

}  // namespace

std::string writer_base_prompt(const std::vector<std::string>& participant_names) {
  std::string names;
  for (const auto& n : participant_names) {
    if (!names.empty()) names += ", ";
    names += n;
  }
  return "Given character pool {" + names + "}, " + std::string(kWriterRequirements);
}

std::string build_critic_prompt() {
  return std::string(kCriticPrompt) + "\n" + std::string(kCriticFormat);
}

std::string render_pool_digest(const std::vector<Character>& participants) {
  std::ostringstream out;
  for (const Character& c : participants) {
    out << "Character " << c.id << ": " << c.name << "\n"
        << "  Age: " << c.profile.age << "\n"
        << "  Gender: " << c.profile.gender << "\n"
        << "  Personality: " << c.profile.personality << "\n"
        << "  Speaking style: " << c.profile.speaking_style << "\n";
    for (const auto& [key, value] : c.profile.extra) {
      out << "  " << key << ": " << value << "\n";
    }
    if (!c.relations.empty()) {
      out << "  Relations:\n";
      for (const Relation& r : c.relations) {
        out << "    - " << r.peer << " (" << to_string(r.kind) << ")";
        if (!r.note.empty()) out << ": " << r.note;
        out << "\n";
      }
    }
  }
  return out.str();
}

WriterRequest build_writer_prompt(
    const std::vector<Character>& participants,
    const std::optional<std::pair<DialogueScript, CritiqueFeedback>>& prior,
    const WriterPromptOptions& options) {
  if (participants.size() < 2) {
    throw ValidationError("a dialogue needs at least two participants, got " +
                          std::to_string(participants.size()));
  }
  for (const Character& c : participants) {
    if (c.language != participants.front().language) {
      throw ValidationError("participants mix languages: '" + c.id + "'");
    }
  }

  WriterRequest req;
  req.language = participants.front().language;
  for (const Character& c : participants) {
    req.participant_ids.push_back(c.id);
    req.participant_names.push_back(c.name);
  }
  req.pool_digest = render_pool_digest(participants);
  req.topic = options.topic;
  req.params = options.params;
  req.self_refine = options.self_refine && prior.has_value();

  std::string system = writer_base_prompt(req.participant_names);
  system += "\n";
  system += kMarkupGuide;
  if (prior) {
    req.prior_script = prior->first;
    req.prior_feedback = prior->second;
    if (!req.topic) req.topic = prior->first.topic_tag;
    system += "\n";
    system += req.self_refine ? kSelfRevision : kCriticRevision;
  }
  system += "\n";
  system += kWriterFormat;
  req.system_prompt = std::move(system);
  return req;
}

std::string WriterRequest::user_message() const {
  std::ostringstream out;
  out << "Participants:\n" << pool_digest;
  if (topic) out << "\nTopic: " << *topic << "\n";
  if (prior_script) {
    out << "\nPrevious script (iteration " << prior_script->iteration_index << "):\n";
    for (const Utterance& u : prior_script->utterances) {
      out << u.index << ". " << u.speaker_id << ": " << u.raw_text << "\n";
    }
  }
  if (prior_feedback) {
    if (self_refine) {
      out << "\nSelf-review notes:\n";
    } else {
      out << "\nFeedback on the previous script:\n";
    }
    for (const UtteranceFeedback& f : prior_feedback->per_utterance) {
      out << "- Sentence " << f.index << " [";
      for (std::size_t i = 0; i < f.criteria.size(); ++i) {
        out << (i ? ", " : "") << to_string(f.criteria[i]);
      }
      out << "]: " << f.suggestion << "\n";
    }
    if (prior_feedback->global_notes) out << *prior_feedback->global_notes << "\n";
  }
  if (corrective_note) out << "\n" << *corrective_note << "\n";
  return out.str();
}

std::vector<AudioSegment> SynthesisResult::audio() const {
  std::vector<AudioSegment> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.audio);
  return out;
}

std::optional<std::string> extract_fenced_block(std::string_view text) {
  const std::size_t open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t body = text.find('\n', open + 3);
  if (body == std::string_view::npos) return std::nullopt;
  ++body;
  const std::size_t close = text.find("```", body);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(body, close - body));
}

namespace {

json parse_fenced_array(std::string_view reply, const char* who) {
  if (reply.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw MalformedOutputError(std::string(who) + " returned an empty reply",
                               std::string(reply));
  }
  auto block = extract_fenced_block(reply);
  if (!block) {
    throw MalformedOutputError(std::string(who) + " reply has no fenced block",
                               std::string(reply));
  }
  json doc;
  try {
    doc = json::parse(*block);
  } catch (const json::parse_error& e) {
    throw MalformedOutputError(std::string(who) + " fenced block is not JSON: " + e.what(),
                               std::string(reply));
  }
  if (!doc.is_array()) {
    throw MalformedOutputError(std::string(who) + " fenced block is not an array",
                               std::string(reply));
  }
  return doc;
}

}  // namespace

DialogueScript parse_writer_reply(std::string_view reply, const WriterRequest& request,
                                  const MarkupConfig& markup) {
  const json doc = parse_fenced_array(reply, "writer");
  DialogueScript script;
  script.language = request.language;
  script.participants = request.participant_ids;
  script.iteration_index = request.next_iteration_index();
  script.topic_tag = request.topic;
  std::size_t index = 0;
  for (const json& item : doc) {
    if (!item.is_object() || !item.contains("speaker") || !item["speaker"].is_string() ||
        !item.contains("text") || !item["text"].is_string()) {
      throw MalformedOutputError(
          "writer line " + std::to_string(index) + " is not {speaker, text}",
          std::string(reply));
    }
    std::string speaker = item["speaker"].get<std::string>();
    std::string text = item["text"].get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw MalformedOutputError("writer line " + std::to_string(index) + " is empty",
                                 std::string(reply));
    }
    for (std::size_t p = 0; p < request.participant_names.size(); ++p) {
      if (speaker == request.participant_names[p] &&
          std::find(request.participant_ids.begin(), request.participant_ids.end(),
                    speaker) == request.participant_ids.end()) {
        speaker = request.participant_ids[p];
      }
    }
    try {
      script.utterances.push_back(make_utterance(std::move(speaker), std::move(text),
                                                 index, markup));
    } catch (const MarkupError& e) {
      throw MalformedOutputError("writer line " + std::to_string(index) + ": " + e.what(),
                                 std::string(reply));
    }
    ++index;
  }
  return script;
}

CritiqueFeedback parse_critic_reply(std::string_view reply, std::size_t utterance_count) {
  const json doc = parse_fenced_array(reply, "critic");
  CritiqueFeedback fb;
  for (const json& item : doc) {
    if (!item.is_object() || !item.contains("index") || !item["index"].is_number_integer() ||
        !item.contains("suggestion") || !item["suggestion"].is_string()) {
      throw MalformedOutputError("critic entry is not {index, suggestion, criteria}",
                                 std::string(reply));
    }
    const auto index = item["index"].get<long long>();
    if (index < 0 || static_cast<std::size_t>(index) >= utterance_count) {
      throw MalformedOutputError("critic references sentence " + std::to_string(index) +
                                     " of a " + std::to_string(utterance_count) +
                                     "-sentence script",
                                 std::string(reply));
    }
    UtteranceFeedback f;
    f.index = static_cast<std::size_t>(index);
    f.suggestion = item["suggestion"].get<std::string>();
    if (f.suggestion.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw MalformedOutputError("critic suggestion for sentence " +
                                     std::to_string(index) + " is empty",
                                 std::string(reply));
    }
    if (auto crit = item.find("criteria"); crit != item.end() && crit->is_array()) {
      for (const json& c : *crit) {
        auto parsed = c.is_string() ? parse_criterion(c.get<std::string>()) : std::nullopt;
        if (!parsed) {
          throw MalformedOutputError("critic uses an unknown criterion: " + c.dump(),
                                     std::string(reply));
        }
        f.criteria.push_back(*parsed);
      }
    }
    std::sort(f.criteria.begin(), f.criteria.end());
    f.criteria.erase(std::unique(f.criteria.begin(), f.criteria.end()), f.criteria.end());
    fb.per_utterance.push_back(std::move(f));
  }
  return fb;
}

std::string render_writer_reply(const DialogueScript& script) {
  json lines = json::array();
  for (const Utterance& u : script.utterances) {
    lines.push_back({{"speaker", u.speaker_id}, {"text", u.raw_text}});
  }
  return "```json\n" + lines.dump(2) + "\n```\n";
}

std::string render_critic_reply(const CritiqueFeedback& feedback) {
  json entries = json::array();
  for (const UtteranceFeedback& f : feedback.per_utterance) {
    json criteria = json::array();
    for (Criterion c : f.criteria) criteria.push_back(std::string(to_string(c)));
    entries.push_back(
        {{"index", f.index}, {"suggestion", f.suggestion}, {"criteria", criteria}});
  }
  return "```json\n" + entries.dump(2) + "\n```\n";
}

DialogueScript write_script(WriterBackend& backend, const WriterRequest& request,
                            const CharacterPool& pool, const ScriptBounds& bounds,
                            const MarkupConfig& markup) {
  if (request.prior_script.has_value() != request.prior_feedback.has_value()) {
    throw ValidationError("writer request needs both prior script and feedback, or neither");
  }
  const std::string reply = backend.generate(request);
  DialogueScript script = parse_writer_reply(reply, request, markup);
  const auto violations = validate_script(script, pool, bounds);
  if (!violations.empty()) {
    std::string msg = "writer produced an invalid script:";
    for (const auto& v : violations) msg += " [" + v.code + " " + v.subject + "]";
    throw MalformedOutputError(msg, reply);
  }
  return script;
}

SynthesisResult synthesize(SynthesizerBackend& backend, const DialogueScript& script,
                           const CharacterPool& pool) {
  SynthesisResult result;
  result.backend_id = backend.id();
  for (const Utterance& u : script.utterances) {
    const std::string where = "utterance " + std::to_string(u.index);
    const Character* speaker = pool.find(u.speaker_id);
    if (!speaker) throw BackendError(where + ": speaker '" + u.speaker_id + "' not in pool");

    SynthesisRequest req;
    req.utterance_index = u.index;
    req.speaker_id = u.speaker_id;
    req.text = u.raw_text;
    req.stripped_text = strip_markup(u);
    req.language = script.language;
    try {
      req.reference_audio = read_binary_file(pool.resolve_audio(*speaker));
    } catch (const IoError& e) {
      throw BackendError(where + ": reference audio unavailable: " + e.what());
    }

    std::vector<std::uint8_t> wav;
    try {
      wav = backend.synthesize(req);
    } catch (const BackendError& e) {
      throw BackendError(where + ": " + e.what(), e.status(), e.body_excerpt());
    }
    SynthesizedSegment seg;
    seg.utterance_index = u.index;
    try {
      seg.audio = decode_wav(wav);
    } catch (const FormatError& e) {
      throw BackendError(where + ": synthesizer returned invalid audio: " + e.what());
    }
    if (seg.audio.samples.empty()) {
      throw BackendError(where + ": synthesizer returned zero-length audio");
    }
    seg.audio.silent_minimum = req.stripped_text.empty();
    result.segments.push_back(std::move(seg));
  }
  return result;
}

CritiqueFeedback critique(CriticBackend& backend, const SynthesisResult& dialogue,
                          const DialogueScript& script) {
  if (dialogue.segments.size() != script.utterances.size()) {
    throw ValidationError("synthesis has " + std::to_string(dialogue.segments.size()) +
                          " segments for " + std::to_string(script.utterances.size()) +
                          " utterances");
  }
  CritiqueRequest req;
  req.prompt = build_critic_prompt();
  req.script = script;
  for (std::size_t i = 0; i < script.utterances.size(); ++i) {
    const Utterance& u = script.utterances[i];
    if (dialogue.segments[i].utterance_index != u.index) {
      throw ValidationError("synthesis segment order does not match the script");
    }
    req.clips.push_back({u.index, u.speaker_id, strip_markup(u),
                         dialogue.segments[i].wav_bytes()});
  }
  return parse_critic_reply(backend.review(req), script.utterances.size());
}

}  // namespace dsynth
