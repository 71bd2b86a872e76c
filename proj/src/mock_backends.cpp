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

#include "dsynth/mock_backends.hpp"

#include <cmath>

#include "dsynth/error.hpp"

namespace dsynth {

namespace {

constexpr const char* kOpenersEn[8] = {
    "I have been thinking about this all week.",
    "Honestly, I did not expect that.",
    "You know, that reminds me of last summer.",
    "Wait, are you serious?",
    "That sounds like a great plan.",
    "I am not so sure about that.",
    "Well, here is the thing.",
    "Can I share something with you?",
};

constexpr const char* kFollowUpsEn[8] = {
    "We should talk it through before deciding anything.",
    "Maybe we can try a different approach this time.",
    "It would mean a lot to everyone involved.",
    "Let me know what you think about it.",
    "I really want this to work out for us.",
    "There might be a simpler way to handle it.",
    "Everyone deserves a fair chance to speak.",
    "It could change how we spend our weekends.",
};

constexpr const char* kOpenersCn[8] = {
    "这件事我想了一整个星期。", "说实话，我真没想到。", "你知道吗，这让我想起去年夏天。",
    "等等，你是认真的吗？",     "听起来是个好计划。",   "我对这个不太确定。",
    "嗯，事情是这样的。",       "我能跟你说件事吗？",
};

constexpr const char* kFollowUpsCn[8] = {
    "我们应该先好好商量一下再决定。", "也许这次我们可以换个方法试试。",
    "这对大家来说都很重要。",         "告诉我你是怎么想的。",
    "我真的希望这件事能顺利。",       "也许有更简单的办法。",
    "每个人都应该有发言的机会。",     "这可能会改变我们过周末的方式。",
};

bool has_label_or_pause(const Utterance& u, bool want_label) {
  return want_label ? u.emotion_label.has_value() : u.has_pause();
}

std::size_t code_points(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

std::string insert_pause_after_first_sentence(std::string_view raw_text) {
  static constexpr std::string_view kCjkStops[] = {"。", "！", "？"};
  for (std::size_t i = 0; i < raw_text.size(); ++i) {
    std::size_t stop_len = 0;
    const char c = raw_text[i];
    if (c == '.' || c == '!' || c == '?') {
      stop_len = 1;
    } else {
      for (auto stop : kCjkStops) {
        if (raw_text.substr(i).starts_with(stop)) stop_len = stop.size();
      }
    }
    if (stop_len == 0) continue;
    const std::size_t after = i + stop_len;
    const std::size_t next = raw_text.find_first_not_of(' ', after);
    if (next == std::string_view::npos) break;
    if (raw_text[next] == '.' || raw_text[next] == '!' || raw_text[next] == '?') continue;
    return std::string(raw_text.substr(0, after)) + " [breath] " +
           std::string(raw_text.substr(next));
  }
  return std::string(raw_text) + " [breath]";
}

std::string MockWriter::generate(const WriterRequest& request) {
  const std::uint64_t seed = request.params.seed.value_or(0);
  DialogueScript script;
  script.participants = request.participant_ids;
  script.language = request.language;

  if (!request.prior_script) {
    const std::size_t n = request.participant_ids.size();
    const std::size_t m = std::max<std::size_t>(4, n + seed % 3);
    const bool cn = request.language == Language::kCN;
    for (std::size_t j = 0; j < m; ++j) {
      const char* opener = (cn ? kOpenersCn : kOpenersEn)[(seed + 3 * j) % 8];
      const char* follow = (cn ? kFollowUpsCn : kFollowUpsEn)[(seed + 5 * j + 1) % 8];
      std::string text = std::string(opener) + (cn ? "" : " ") + follow;
      Utterance u;
      u.speaker_id = request.participant_ids[j % n];
      u.raw_text = std::move(text);
      u.index = j;
      script.utterances.push_back(std::move(u));
    }
    return render_writer_reply(script);
  }

  const DialogueScript& prior = *request.prior_script;
  const int t = prior.iteration_index + 1;
  for (const Utterance& u : prior.utterances) {
    Utterance next = u;
    const bool flagged =
        request.self_refine || (request.prior_feedback && request.prior_feedback->flags(u.index));
    if (flagged) {
      std::string text = u.raw_text;
      if (!request.self_refine && !has_label_or_pause(u, false)) {
        text = insert_pause_after_first_sentence(text);
      }
      if (!has_label_or_pause(u, true)) {
        text += " [";
        text += kEmotionCycle[(u.index + static_cast<std::size_t>(t)) % 5];
        text += "]";
      }
      next.raw_text = std::move(text);
    }
    script.utterances.push_back(std::move(next));
  }
  return render_writer_reply(script);
}

double MockSynthesizer::duration_for(std::string_view stripped_text) {
  return std::max(kMinSeconds, kSecondsPerChar * static_cast<double>(code_points(stripped_text)));
}

std::vector<std::uint8_t> MockSynthesizer::synthesize(const SynthesisRequest& request) {
  if (request.reference_audio.empty()) {
    throw BackendError("mock synthesizer received no reference audio");
  }
  const double seconds = duration_for(request.stripped_text);
  const auto n = static_cast<std::size_t>(std::llround(seconds * kCanonicalSampleRate));
  const std::vector<std::int16_t> silence(n, 0);
  return encode_wav(silence, kCanonicalSampleRate);
}

std::string MockCritic::review(const CritiqueRequest& request) {
  CritiqueFeedback fb;
  for (const Utterance& u : request.script.utterances) {
    UtteranceFeedback f;
    f.index = u.index;
    if (!u.has_pause()) {
      f.criteria.push_back(Criterion::kNaturalness);
      f.suggestion += "Add a natural pause after the first sentence. ";
    }
    if (!u.emotion_label) {
      f.criteria.push_back(Criterion::kClarityEmotiveness);
      f.suggestion += "Make the emotion explicit with a fitting label.";
    }
    if (f.criteria.empty()) continue;
    while (!f.suggestion.empty() && f.suggestion.back() == ' ') f.suggestion.pop_back();
    fb.per_utterance.push_back(std::move(f));
  }
  return render_critic_reply(fb);
}

std::string FaultInjectingWriter::generate(const WriterRequest& request) {
  const std::uint64_t key = request.params.seed.value_or(0);
  bool fail = false;
  {
    std::lock_guard lock(mutex_);
    std::size_t& calls = calls_[key];
    ++calls;
    const bool targeted = plan_.seeds.empty() || plan_.seeds.count(key) > 0;
    fail = targeted && calls <= plan_.failures;
  }
  if (!fail) return inner_.generate(request);
  switch (plan_.kind) {
    case FaultKind::kBackendError:
      throw BackendError("injected writer failure", 503, "service unavailable");
    case FaultKind::kMalformed:
      return "I am sorry, I cannot format that as requested.";
    case FaultKind::kEmptyBody:
      return "";
  }
  return "";
}

std::size_t FaultInjectingWriter::calls_for(std::uint64_t seed) const {
  std::lock_guard lock(mutex_);
  auto it = calls_.find(seed);
  return it == calls_.end() ? 0 : it->second;
}

}  // namespace dsynth
