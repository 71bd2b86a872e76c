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

#include <gtest/gtest.h>

#include <algorithm>

#include "dsynth/error.hpp"
#include "dsynth/script.hpp"
#include "support/fixtures.hpp"

namespace dsynth {
namespace {

using testing::refined_example_rows;

TEST(ParseMarkup, RowOneEmphasisAndLabel) {
  const ParsedMarkup m = parse_markup(refined_example_rows()[0]);
  ASSERT_EQ(m.segments.size(), 3u);
  EXPECT_EQ(std::get<PlainText>(m.segments[0]).text, "You know, financial literacy is");
  EXPECT_EQ(std::get<EmphasisSpan>(m.segments[1]).text, "so");
  EXPECT_EQ(std::get<PlainText>(m.segments[2]).text,
            "crucial for young adults today. Wouldn't you agree, Mark?");
  EXPECT_EQ(m.emotion_label, "Engaging");
  EXPECT_TRUE(m.warnings.empty());
}

TEST(ParseMarkup, PlainSentence) {
  const ParsedMarkup m = parse_markup("Hello.");
  ASSERT_EQ(m.segments.size(), 1u);
  EXPECT_EQ(std::get<PlainText>(m.segments[0]).text, "Hello.");
  EXPECT_FALSE(m.emotion_label);
}

TEST(ParseMarkup, RowTwoPauseBetweenPlainRuns) {
  const ParsedMarkup m = parse_markup(refined_example_rows()[1]);
  ASSERT_EQ(m.segments.size(), 3u);
  EXPECT_EQ(std::get<PlainText>(m.segments[0]).text, "Absolutely, James!");
  EXPECT_EQ(std::get<PauseToken>(m.segments[1]).kind, "breath");
  EXPECT_TRUE(std::holds_alternative<PlainText>(m.segments[2]));
  EXPECT_EQ(m.emotion_label, "Agreeable");
}

// The last row closes with "[Encouraged]." so the bracket is not trailing.
TEST(ParseMarkup, BracketFollowedByPunctuationIsNotALabel) {
  const ParsedMarkup m = parse_markup(refined_example_rows()[4]);
  EXPECT_FALSE(m.emotion_label);
  EXPECT_EQ(m.warnings.size(), 1u);
  ASSERT_EQ(m.segments.size(), 1u);
  EXPECT_NE(std::get<PlainText>(m.segments[0]).text.find("[Encouraged]."), std::string::npos);
}

TEST(ParseMarkup, Errors) {
  EXPECT_THROW(parse_markup("a <strong>b"), MarkupError);
  EXPECT_THROW(parse_markup("a </strong> b"), MarkupError);
  EXPECT_THROW(parse_markup("<strong>a <strong>b</strong></strong>"), MarkupError);
  EXPECT_THROW(parse_markup("<strong>a [breath] b</strong>"), MarkupError);
}

TEST(ParseMarkup, UnknownAndMidTextBracketsWarn) {
  const ParsedMarkup m = parse_markup("Well [laugh] that is [Happy] odd.");
  ASSERT_EQ(m.segments.size(), 1u);
  EXPECT_EQ(std::get<PlainText>(m.segments[0]).text, "Well [laugh] that is [Happy] odd.");
  EXPECT_EQ(m.warnings.size(), 2u);
  EXPECT_FALSE(m.emotion_label);
}

TEST(ParseMarkup, TrailingPauseIsNotALabel) {
  const ParsedMarkup m = parse_markup("Okay then [breath]");
  EXPECT_FALSE(m.emotion_label);
  ASSERT_EQ(m.segments.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<PauseToken>(m.segments[1]));
}

TEST(ParseMarkup, ConfigurableVocabulary) {
  MarkupConfig cfg;
  cfg.pause_vocabulary = {"breath", "laugh"};
  cfg.emphasis_open = "<em>";
  cfg.emphasis_close = "</em>";
  const ParsedMarkup m = parse_markup("Ha [laugh] that is <em>good</em> [Happy]", cfg);
  ASSERT_EQ(m.segments.size(), 4u);
  EXPECT_EQ(std::get<PauseToken>(m.segments[1]).kind, "laugh");
  EXPECT_EQ(std::get<EmphasisSpan>(m.segments[3]).text, "good");
  EXPECT_EQ(render_markup(m.segments, m.emotion_label, cfg), "Ha [laugh] that is <em>good</em> [Happy]");
}

TEST(RenderMarkup, CanonicalForms) {
  EXPECT_EQ(render_markup({PlainText{"Hi"}}, std::nullopt), "Hi");
  const ParsedMarkup row1 = parse_markup(refined_example_rows()[0]);
  const std::string r = render_markup(row1.segments, row1.emotion_label);
  EXPECT_NE(r.find("<strong>so</strong>"), std::string::npos);
  EXPECT_TRUE(r.ends_with("[Engaging]"));
  EXPECT_EQ(render_markup({PlainText{"a b"}, PauseToken{"breath"}, PlainText{"c"}}, std::nullopt),
            "a b [breath] c");
}

std::string non_markup_chars(std::string s, const MarkupConfig& cfg = {}) {
  auto erase_all = [&](const std::string& what) {
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what)) s.erase(pos, what.size());
  };
  erase_all(cfg.emphasis_open);
  erase_all(cfg.emphasis_close);
  for (const auto& p : cfg.pause_vocabulary) erase_all("[" + p + "]");
  std::erase_if(s, [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
  std::sort(s.begin(), s.end());
  return s;
}

std::string segment_chars(const ParsedMarkup& m) {
  std::string s;
  for (const Segment& seg : m.segments) {
    if (const auto* p = std::get_if<PlainText>(&seg)) s += p->text;
    if (const auto* e = std::get_if<EmphasisSpan>(&seg)) s += e->text;
  }
  if (m.emotion_label) s += "[" + *m.emotion_label + "]";
  return non_markup_chars(s);
}

TEST(MarkupProperties, GrammarRoundTrip) {
  Rng rng(20260101);
  for (int i = 0; i < 2000; ++i) {
    const testing::GeneratedUtterance g = testing::generate_utterance(rng);
    const ParsedMarkup canonical = parse_markup(g.canonical);
    ASSERT_EQ(canonical.segments, g.segments) << g.canonical;
    ASSERT_EQ(canonical.emotion_label, g.label) << g.canonical;
    ASSERT_EQ(render_markup(canonical.segments, canonical.emotion_label), g.canonical);

    const ParsedMarkup noisy = parse_markup(g.noisy);
    ASSERT_EQ(noisy.segments, g.segments) << g.noisy;
    ASSERT_EQ(noisy.emotion_label, g.label) << g.noisy;
    ASSERT_EQ(normalize_markup_whitespace(g.noisy), normalize_markup_whitespace(g.canonical));
    ASSERT_EQ(non_markup_chars(g.noisy), segment_chars(noisy)) << g.noisy;

    Utterance u = make_utterance("a", g.noisy, 0);
    const std::string stripped = strip_markup(u);
    for (const char* bad : {"[", "]", "<strong>", "</strong>"}) {
      ASSERT_EQ(stripped.find(bad), std::string::npos) << stripped;
    }
  }
}

TEST(MarkupProperties, RefinedRowsRoundTrip) {
  for (const std::string& row : refined_example_rows()) {
    const ParsedMarkup m = parse_markup(row);
    const std::string rendered = render_markup(m.segments, m.emotion_label);
    EXPECT_EQ(normalize_markup_whitespace(rendered), normalize_markup_whitespace(row));
    const ParsedMarkup again = parse_markup(rendered);
    EXPECT_EQ(again.segments, m.segments);
    EXPECT_EQ(again.emotion_label, m.emotion_label);
    EXPECT_EQ(non_markup_chars(row), segment_chars(m));
  }
}

TEST(StripMarkup, Examples) {
  EXPECT_EQ(strip_markup(make_utterance("james", refined_example_rows()[0], 0)), testing::kRow1Plain);
  EXPECT_EQ(strip_markup(make_utterance("a", "Just  plain   words.", 0)), "Just plain words.");
  EXPECT_EQ(strip_markup(make_utterance("a", "[breath] [Agreeable]", 0)), "");
  EXPECT_TRUE(make_utterance("a", "[breath] [Agreeable]", 0).has_pause());
}

class ValidateScriptTest : public ::testing::Test {
 protected:
  ValidateScriptTest() {
    std::vector<Character> c{testing::make_character("james", "James", Language::kEN),
                             testing::make_character("mark", "Mark", Language::kEN),
                             testing::make_character("li", "Li", Language::kCN)};
    pool_ = CharacterPool(c);
    for (std::size_t j = 0; j < refined_example_rows().size(); ++j) {
      script_.utterances.push_back(
          make_utterance(testing::refined_example_speakers()[j], refined_example_rows()[j], j));
    }
    script_.participants = {"james", "mark"};
  }
  std::vector<std::string> codes(const DialogueScript& s, ScriptBounds b = {}) {
    std::vector<std::string> out;
    for (const auto& v : validate_script(s, pool_, b)) out.push_back(v.code);
    return out;
  }
  CharacterPool pool_;
  DialogueScript script_;
};

TEST_F(ValidateScriptTest, RefinedExampleIsValid) { EXPECT_TRUE(codes(script_).empty()); }

TEST_F(ValidateScriptTest, SingleDefects) {
  auto s = script_;
  s.utterances[1].speaker_id = "Ghost";
  s.participants.push_back("Ghost");
  EXPECT_EQ(codes(s), std::vector<std::string>{"UNKNOWN_SPEAKER"});

  s = script_;
  s.utterances.resize(1);
  s.participants = {"james"};
  EXPECT_EQ(codes(s), std::vector<std::string>{"TOO_FEW_UTTERANCES"});

  s = script_;
  EXPECT_EQ(codes(s, {2, 4}), std::vector<std::string>{"TOO_MANY_UTTERANCES"});

  s = script_;
  s.participants = {"james"};
  EXPECT_EQ(codes(s), std::vector<std::string>{"SPEAKER_NOT_PARTICIPANT"});

  s = script_;
  s.participants.push_back("li");
  auto c = codes(s);
  EXPECT_NE(std::find(c.begin(), c.end(), "SILENT_PARTICIPANT"), c.end());
  EXPECT_NE(std::find(c.begin(), c.end(), "LANGUAGE_MISMATCH"), c.end());

  s = script_;
  s.utterances[2].index = 7;
  EXPECT_EQ(codes(s), std::vector<std::string>{"BAD_UTTERANCE_INDEX"});

  s = script_;
  s.iteration_index = -1;
  EXPECT_EQ(codes(s), std::vector<std::string>{"NEGATIVE_ITERATION"});
}

TEST_F(ValidateScriptTest, SerializationRoundTrip) {
  auto s = script_;
  s.topic_tag = "personal finance";
  s.iteration_index = 2;
  const DialogueScript back = parse_script(serialize_script(s));
  EXPECT_EQ(serialize_script(back), serialize_script(s));
  ASSERT_EQ(back.utterances.size(), 5u);
  EXPECT_EQ(back.utterances[0].segments, s.utterances[0].segments);
  EXPECT_EQ(back.topic_tag, "personal finance");
  EXPECT_EQ(back.iteration_index, 2);
}

}  // namespace
}  // namespace dsynth
