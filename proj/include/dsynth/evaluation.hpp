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

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsynth/audio.hpp"
#include "dsynth/language.hpp"

namespace dsynth {

// Bumped whenever normalize_text's rules change; stamped into every report.
inline constexpr std::string_view kNormalizationVersion = "dsynth-norm-1";

// EN: lowercase, drop . , ! ? ; : ' " ( ) -, split on whitespace.
// CN: drop whitespace, the same ASCII punctuation and CJK punctuation
// 。，！？；：“”‘’（）、, then split into code points.
std::vector<std::string> normalize_text(std::string_view text, Language language);

// Levenshtein distance with unit costs.
template <typename T>
std::size_t edit_distance(std::span<const T> reference, std::span<const T> hypothesis) {
  std::vector<std::size_t> row(hypothesis.size() + 1);
  for (std::size_t j = 0; j <= hypothesis.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hypothesis.size(); ++j) {
      const std::size_t above = row[j];
      const std::size_t substitute =
          diagonal + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      row[j] = std::min({substitute, above + 1, row[j - 1] + 1});
      diagonal = above;
    }
  }
  return row[hypothesis.size()];
}

struct TranscriptPair {
  std::string reference;
  std::string hypothesis;
  Language language = Language::kEN;
};

struct ErrorCounts {
  std::size_t edits = 0;
  std::size_t reference_length = 0;
};

// Throws EmptyInputError("EmptyReference") when the normalized reference is
// empty.
ErrorCounts error_counts(const TranscriptPair& pair);

// WER for EN pairs, CER for CN pairs, as a fraction.
double error_rate(const TranscriptPair& pair);

// Pooled: sum of edits over sum of reference lengths, in percent. All pairs
// must share a language. The serial version is the reference for the
// OpenMP reduction.
double corpus_error_rate(std::span<const TranscriptPair> pairs);
double corpus_error_rate_serial(std::span<const TranscriptPair> pairs);

enum class RatingMetric { kMOS, kEMOS, kTMOS, kNaturalness, kEmotiveness };

std::string_view to_string(RatingMetric metric);
std::optional<RatingMetric> parse_rating_metric(std::string_view text);

struct RatingItem {
  std::string dialogue_id;
  std::string rater_id;
  double score = 0.0;
};

struct RatingSheet {
  RatingMetric metric = RatingMetric::kMOS;
  std::vector<RatingItem> items;
};

// Mean with a 95% normal-approximation confidence half-width:
// 1.96 * sample_sd / sqrt(n). n = 1 gives dispersion 0.
struct AggregateScore {
  double mean = 0.0;
  double dispersion = 0.0;
  std::size_t n = 0;
};

AggregateScore aggregate(std::span<const double> scores);
AggregateScore aggregate(const RatingSheet& sheet);

// Parses [{metric, dialogue_id, rater_id, score}, ...] into one sheet per
// metric, checking score range, half-point granularity and (dialogue, rater)
// uniqueness. Throws ParseError citing the item position.
std::map<RatingMetric, RatingSheet> parse_ratings(std::string_view json_text);

enum class Preference { kA, kB, kTie };

struct PreferenceVote {
  std::string dialogue_id;
  Preference choice = Preference::kTie;
};

struct PreferenceTally {
  std::size_t a = 0, b = 0, tie = 0;
  double a_percent = 0.0, b_percent = 0.0, tie_percent = 0.0;
  std::size_t total() const { return a + b + tie; }
};

PreferenceTally preference_tally(std::span<const PreferenceVote> votes);

// Rounds to `decimals` places, half away from zero.
double round_to(double value, int decimals);

struct TranscriptLine {
  std::string dialogue_id;
  std::size_t utterance_index = 0;
  std::string hypothesis;
  std::size_t line = 0;
};

// "dialogue_id<TAB>utterance_index<TAB>hypothesis" per line; blank lines and
// lines starting with '#' are skipped. Throws ParseError with line number.
std::vector<TranscriptLine> parse_transcripts(std::string_view tsv);

// External MOS predictor. Implementations return the raw reply; callers go
// through score_with_predictor, which enforces the [1, 5] contract.
class ScorePredictor {
 public:
  virtual ~ScorePredictor() = default;
  virtual double predict(const AudioSegment& audio) = 0;
};

// Throws OutOfRangeScore for replies outside [1, 5].
double score_with_predictor(ScorePredictor& predictor, const AudioSegment& audio);
double score_with_predictor(ScorePredictor& predictor, const DialogueAudio& audio);
double mean_predicted_score(ScorePredictor& predictor,
                            std::span<const AudioSegment> clips);

// Replays a fixed list of scores, cycling; a single value acts as a constant.
class CannedPredictor final : public ScorePredictor {
 public:
  explicit CannedPredictor(std::vector<double> scores) : scores_(std::move(scores)) {}
  double predict(const AudioSegment&) override;

 private:
  std::vector<double> scores_;
  std::size_t next_ = 0;
};

}  // namespace dsynth
