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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "dsynth/audio.hpp"
#include "dsynth/io.hpp"

namespace dsynth::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (;;) {
    path_ = base / ("dsynth-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_tone_wav(const fs::path& path, int sample_rate, std::size_t samples) {
  std::vector<std::int16_t> pcm(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    pcm[i] = static_cast<std::int16_t>(2000.0 * std::sin(0.05 * static_cast<double>(i)));
  }
  write_file_atomic(path, encode_wav(pcm, sample_rate));
}

Character make_character(const std::string& id, const std::string& name, Language language) {
  Character c;
  c.id = id;
  c.name = name;
  c.language = language;
  c.profile.age = 30;
  c.profile.gender = "female";
  c.profile.personality = "curious";
  c.profile.speaking_style = "says 'you know' a lot";
  c.audio_ref = "ref/" + id + ".wav";
  return c;
}

void relate(std::vector<Character>& chars, const std::string& a, const std::string& b,
            RelationKind kind, const std::string& note) {
  for (Character& c : chars) {
    if (c.id == a) c.relations.push_back({b, kind, note});
    if (c.id == b) c.relations.push_back({a, kind, note});
  }
}

CharacterPool make_pool(const fs::path& dir, std::size_t n_en, std::size_t n_cn) {
  std::vector<Character> chars;
  auto add = [&](Language lang, std::size_t n, const char* prefix) {
    const std::size_t first = chars.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = std::string(prefix) + std::to_string(i);
      chars.push_back(make_character(id, "Name" + id, lang));
      write_tone_wav(dir / "ref" / (id + ".wav"), 16000, 800);
    }
    for (std::size_t i = 0; n > 2 && i < n; ++i) {
      relate(chars, chars[first + i].id, chars[first + (i + 1) % n].id,
             static_cast<RelationKind>(i % 3));
    }
    if (n == 2) relate(chars, chars[first].id, chars[first + 1].id, RelationKind::kFriendship);
  };
  add(Language::kEN, n_en, "en");
  add(Language::kCN, n_cn, "cn");
  return CharacterPool(std::move(chars), dir);
}

const std::vector<std::string>& refined_example_rows() {
  static const std::vector<std::string> rows = {
      "You know, financial literacy is <strong> so </strong>crucial for young adults today. "
      "Wouldn't you agree, Mark? [Engaging]",
      "Absolutely, James! [breath] Understanding budgeting and saving early can really set them "
      "up for success in the future. It's so important! [Agreeable]",
      "Right! [breath] But how do we make these concepts <strong> engaging </strong> for them? "
      "Maybe we could use practical examples and interactive tools. [Curious]",
      "We could let them manage a mock portfolio, perhaps. [breath] Real-life simulations could "
      "boost their interest and understanding. [Innovative]",
      "That's a solid idea, Mark. Those hands-on experiences can make all the difference! "
      "[Encouraged].",
  };
  return rows;
}

const std::vector<std::string>& refined_example_speakers() {
  static const std::vector<std::string> s = {"james", "mark", "james", "mark", "james"};
  return s;
}

namespace {

const char* kWords[] = {"you", "know", "so", "crucial", "Mark,", "agree?", "really", "it's",
                        "fine.", "well", "okay!", "maybe", "budget", "上海", "你好，", "(aside)",
                        "well-known", "\"quoted\"", "50%", "no;"};
const char* kLabels[] = {"Engaging", "Agreeable", "Curious", "Innovative", "Encouraged",
                         "Happy", "Sad_Tone", "Very-Angry", "Calm Down"};

std::string words(Rng& rng, std::size_t min_count) {
  const std::size_t n = min_count + rng.below(4);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kWords[rng.below(std::size(kWords))];
  }
  return out;
}

std::string pad(Rng& rng) {
  static const char* kPads[] = {"", " ", "  ", "\t", " \n "};
  return kPads[rng.below(std::size(kPads))];
}

}  // namespace

GeneratedUtterance generate_utterance(Rng& rng) {
  GeneratedUtterance g;
  const std::size_t n = 1 + rng.below(6);
  bool last_plain = false;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t kind = rng.below(3);
    if (kind == 0 && last_plain) kind = 1 + rng.below(2);
    if (kind == 0) {
      g.segments.push_back(PlainText{words(rng, 1)});
    } else if (kind == 1) {
      g.segments.push_back(EmphasisSpan{words(rng, 1)});
    } else {
      g.segments.push_back(PauseToken{"breath"});
    }
    last_plain = kind == 0;
  }
  if (rng.below(3) != 0) g.label = kLabels[rng.below(std::size(kLabels))];
  g.canonical = render_markup(g.segments, g.label);

  std::string noisy = pad(rng);
  for (const Segment& s : g.segments) {
    if (const auto* p = std::get_if<PlainText>(&s)) {
      std::string t = p->text;
      std::string spaced;
      for (char c : t) spaced += c == ' ' ? std::string(rng.below(2) ? "  " : " ") : std::string(1, c);
      noisy += spaced;
    } else if (const auto* e = std::get_if<EmphasisSpan>(&s)) {
      noisy += "<strong>" + pad(rng) + e->text + pad(rng) + "</strong>";
    } else {
      noisy += "[breath]";
    }
    static const char* kSeps[] = {"", " ", " \t "};
    noisy += kSeps[rng.below(3)];
  }
  if (g.label) noisy += "[" + *g.label + "]";
  noisy += pad(rng);
  g.noisy = noisy;
  return g;
}

std::size_t edit_distance_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> memo((a.size() + 1) * (b.size() + 1), kUnset);
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t& slot = memo[i * (b.size() + 1) + j];
    if (slot == kUnset) {
      slot = std::min({d(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1), d(i + 1, j) + 1, d(i, j + 1) + 1});
    }
    return slot;
  };
  return d(0, 0);
}

}  // namespace dsynth::testing
