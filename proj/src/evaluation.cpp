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

#include "dsynth/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "dsynth/error.hpp"
#include "json.hpp"

namespace dsynth {

using nlohmann::json;

namespace {

constexpr std::string_view kAsciiPunctuation = ".,!?;:'\"()-";

const std::set<std::string>& cjk_punctuation() {
  static const std::set<std::string> kSet = {
      "。", "，", "！", "？", "；", "：", "“", "”", "‘", "’", "（", "）", "、"};
  return kSet;
}

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte: treat as its own unit
}

}  // namespace

std::vector<std::string> normalize_text(std::string_view text, Language language) {
  std::vector<std::string> tokens;
  if (language == Language::kEN) {
    std::string current;
    for (char ch : text) {
      const auto c = static_cast<unsigned char>(ch);
      if (is_ascii_space(c)) {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (kAsciiPunctuation.find(ch) != std::string_view::npos) continue;
      current.push_back(static_cast<char>(std::tolower(c)));
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
  }

  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    const std::size_t len = std::min(utf8_length(c), text.size() - i);
    std::string unit(text.substr(i, len));
    i += len;
    if (len == 1 && (is_ascii_space(c) ||
                     kAsciiPunctuation.find(static_cast<char>(c)) != std::string_view::npos)) {
      continue;
    }
    if (cjk_punctuation().count(unit)) continue;
    tokens.push_back(std::move(unit));
  }
  return tokens;
}

ErrorCounts error_counts(const TranscriptPair& pair) {
  const auto ref = normalize_text(pair.reference, pair.language);
  if (ref.empty()) {
    throw EmptyInputError("EmptyReference", "reference is empty after normalization");
  }
  const auto hyp = normalize_text(pair.hypothesis, pair.language);
  return {edit_distance<std::string>(ref, hyp), ref.size()};
}

double error_rate(const TranscriptPair& pair) {
  const ErrorCounts counts = error_counts(pair);
  return static_cast<double>(counts.edits) / static_cast<double>(counts.reference_length);
}

namespace {

void check_same_language(std::span<const TranscriptPair> pairs) {
  for (const auto& p : pairs) {
    if (p.language != pairs.front().language) {
      throw ValidationError("corpus error rate needs pairs of a single language");
    }
  }
}

}  // namespace

double corpus_error_rate_serial(std::span<const TranscriptPair> pairs) {
  if (pairs.empty()) throw EmptyInputError("EmptyReference", "no transcript pairs");
  check_same_language(pairs);
  std::size_t edits = 0, length = 0;
  for (const auto& pair : pairs) {
    const ErrorCounts c = error_counts(pair);
    edits += c.edits;
    length += c.reference_length;
  }
  return 100.0 * static_cast<double>(edits) / static_cast<double>(length);
}

double corpus_error_rate(std::span<const TranscriptPair> pairs) {
  if (pairs.empty()) throw EmptyInputError("EmptyReference", "no transcript pairs");
  check_same_language(pairs);
  const auto n = static_cast<std::int64_t>(pairs.size());
  std::size_t edits = 0, length = 0;
  std::int64_t first_empty = n;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : edits, length) \
    reduction(min : first_empty)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& pair = pairs[static_cast<std::size_t>(i)];
    const auto ref = normalize_text(pair.reference, pair.language);
    if (ref.empty()) {
      first_empty = std::min(first_empty, i);
      continue;
    }
    const auto hyp = normalize_text(pair.hypothesis, pair.language);
    edits += edit_distance<std::string>(ref, hyp);
    length += ref.size();
  }
  if (first_empty < n) {
    throw EmptyInputError("EmptyReference", "reference of pair " +
                                                std::to_string(first_empty) +
                                                " is empty after normalization");
  }
  return 100.0 * static_cast<double>(edits) / static_cast<double>(length);
}

std::string_view to_string(RatingMetric metric) {
  switch (metric) {
    case RatingMetric::kMOS:
      return "MOS";
    case RatingMetric::kEMOS:
      return "EMOS";
    case RatingMetric::kTMOS:
      return "TMOS";
    case RatingMetric::kNaturalness:
      return "naturalness";
    case RatingMetric::kEmotiveness:
      return "emotiveness";
  }
  return "MOS";
}

std::optional<RatingMetric> parse_rating_metric(std::string_view text) {
  for (auto m : {RatingMetric::kMOS, RatingMetric::kEMOS, RatingMetric::kTMOS,
                 RatingMetric::kNaturalness, RatingMetric::kEmotiveness}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

AggregateScore aggregate(std::span<const double> scores) {
  if (scores.empty()) throw EmptyInputError("EmptySheet", "rating sheet is empty");
  AggregateScore out;
  out.n = scores.size();
  out.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(out.n);
  const bool constant = std::all_of(scores.begin(), scores.end(),
                                    [&](double s) { return s == scores.front(); });
  if (out.n < 2 || constant) return out;
  double ss = 0.0;
  for (double s : scores) ss += (s - out.mean) * (s - out.mean);
  // 1.96 * sd / sqrt(n) under one root; keeps [3, 5] at exactly 1.96
  const double n = static_cast<double>(out.n);
  out.dispersion = 1.96 * std::sqrt(ss / ((n - 1.0) * n));
  return out;
}

AggregateScore aggregate(const RatingSheet& sheet) {
  std::vector<double> scores;
  scores.reserve(sheet.items.size());
  for (const auto& item : sheet.items) scores.push_back(item.score);
  return aggregate(scores);
}

std::map<RatingMetric, RatingSheet> parse_ratings(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("ratings file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("ratings file must be a JSON array");
  std::map<RatingMetric, RatingSheet> sheets;
  std::set<std::tuple<RatingMetric, std::string, std::string>> seen;
  std::size_t position = 0;
  for (const json& item : doc) {
    ++position;
    const std::string where = "rating #" + std::to_string(position);
    try {
      const std::string metric_name = item.at("metric").get<std::string>();
      auto metric = parse_rating_metric(metric_name);
      if (!metric) throw ParseError(where + ": unknown metric '" + metric_name + "'");
      RatingItem r;
      r.dialogue_id = item.at("dialogue_id").get<std::string>();
      r.rater_id = item.at("rater_id").get<std::string>();
      r.score = item.at("score").get<double>();
      if (r.score < 1.0 || r.score > 5.0 || std::fmod(r.score * 2.0, 1.0) != 0.0) {
        throw ParseError(where + ": score " + std::to_string(r.score) +
                         " is not a half-point value in [1, 5]");
      }
      if (!seen.emplace(*metric, r.dialogue_id, r.rater_id).second) {
        throw ParseError(where + ": duplicate rating by '" + r.rater_id + "' for '" +
                         r.dialogue_id + "'");
      }
      auto& sheet = sheets[*metric];
      sheet.metric = *metric;
      sheet.items.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return sheets;
}

PreferenceTally preference_tally(std::span<const PreferenceVote> votes) {
  if (votes.empty()) throw EmptyInputError("EmptyVotes", "no preference votes");
  PreferenceTally t;
  for (const auto& v : votes) {
    switch (v.choice) {
      case Preference::kA:
        ++t.a;
        break;
      case Preference::kB:
        ++t.b;
        break;
      case Preference::kTie:
        ++t.tie;
        break;
    }
  }
  const double n = static_cast<double>(votes.size());
  t.a_percent = 100.0 * static_cast<double>(t.a) / n;
  t.b_percent = 100.0 * static_cast<double>(t.b) / n;
  t.tie_percent = 100.0 * static_cast<double>(t.tie) / n;
  return t;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::vector<TranscriptLine> parse_transcripts(std::string_view tsv) {
  std::vector<TranscriptLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    std::size_t end = tsv.find('\n', pos);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == tsv.size()) break;
      continue;
    }
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw ParseError("expected dialogue_id<TAB>utterance_index<TAB>hypothesis", line_no);
    }
    TranscriptLine entry;
    entry.dialogue_id = std::string(line.substr(0, t1));
    const std::string index_text(line.substr(t1 + 1, t2 - t1 - 1));
    if (entry.dialogue_id.empty() || index_text.empty() ||
        index_text.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("malformed dialogue id or utterance index", line_no);
    }
    entry.utterance_index = std::stoul(index_text);
    entry.hypothesis = std::string(line.substr(t2 + 1));
    entry.line = line_no;
    out.push_back(std::move(entry));
    if (end == tsv.size()) break;
  }
  return out;
}

namespace {

double checked(double score) {
  if (!(score >= 1.0 && score <= 5.0)) throw OutOfRangeScore(score);
  return score;
}

}  // namespace

double score_with_predictor(ScorePredictor& predictor, const AudioSegment& audio) {
  return checked(predictor.predict(audio));
}

double score_with_predictor(ScorePredictor& predictor, const DialogueAudio& audio) {
  AudioSegment whole;
  whole.samples = audio.waveform;
  whole.sample_rate = audio.sample_rate;
  return checked(predictor.predict(whole));
}

double mean_predicted_score(ScorePredictor& predictor,
                            std::span<const AudioSegment> clips) {
  if (clips.empty()) throw EmptyInputError("EmptyCorpus", "no clips to score");
  double sum = 0.0;
  for (const auto& clip : clips) sum += score_with_predictor(predictor, clip);
  return sum / static_cast<double>(clips.size());
}

double CannedPredictor::predict(const AudioSegment&) {
  if (scores_.empty()) return 0.0;
  const double s = scores_[next_ % scores_.size()];
  ++next_;
  return s;
}

}  // namespace dsynth
