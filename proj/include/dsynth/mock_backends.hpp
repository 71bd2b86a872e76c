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
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "dsynth/agents.hpp"

namespace dsynth {

// Deterministic offline backends. Every output is a pure function of the
// request, so runs are byte-identical across hosts.
//
// Writer, first draft: M = max(4, n + seed % 3) utterances for n participants,
// speakers round-robin in participant order, utterance j built from template
// sentences opener[(seed + 3j) % 8] and follow-up[(seed + 5j + 1) % 8] of the
// script language.
//
// Writer, revision at iteration t: every utterance flagged by the feedback gets
// "[breath]" inserted after its first sentence (if it has no pause yet) and the
// emotion label kEmotionCycle[(j + t) % 5] appended (if it has no label yet).
// Unflagged utterances are copied unchanged.
//
// Writer, self-refinement: every utterance without a label gets the label
// only; no pauses are inserted.
class MockWriter final : public WriterBackend {
 public:
  static constexpr const char* kEmotionCycle[5] = {"Engaging", "Agreeable", "Curious",
                                                   "Innovative", "Encouraged"};

  std::string id() const override { return "mock-writer"; }
  std::string generate(const WriterRequest& request) override;
};

// Silence-filled PCM-16 mono at 22050 Hz lasting 0.06 s per code point of the
// stripped text, 0.2 s minimum.
class MockSynthesizer final : public SynthesizerBackend {
 public:
  static constexpr double kSecondsPerChar = 0.06;
  static constexpr double kMinSeconds = 0.2;

  static double duration_for(std::string_view stripped_text);

  std::string id() const override { return "mock-synthesizer"; }
  std::vector<std::uint8_t> synthesize(const SynthesisRequest& request) override;
};

// Flags utterances without an emotion label (clarity_emotiveness) and
// utterances without a pause token (naturalness).
class MockCritic final : public CriticBackend {
 public:
  std::string id() const override { return "mock-critic"; }
  std::string review(const CritiqueRequest& request) override;
};

enum class FaultKind { kBackendError, kMalformed, kEmptyBody };

struct FaultPlan {
  FaultKind kind = FaultKind::kBackendError;
  // Calls to fail per targeted key before passing through.
  std::size_t failures = std::numeric_limits<std::size_t>::max();
  // Generation seeds to target; empty targets every request.
  std::set<std::uint64_t> seeds;
};

// Wraps a writer and fails its first `failures` calls for each targeted
// generation seed. Thread-safe.
class FaultInjectingWriter final : public WriterBackend {
 public:
  FaultInjectingWriter(WriterBackend& inner, FaultPlan plan)
      : inner_(inner), plan_(std::move(plan)) {}

  std::string id() const override { return inner_.id(); }
  std::string generate(const WriterRequest& request) override;

  std::size_t calls_for(std::uint64_t seed) const;

 private:
  WriterBackend& inner_;
  FaultPlan plan_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::size_t> calls_;
};

// Inserts " [breath]" after the first sentence terminator that is followed
// by more text, or at the end when there is none.
std::string insert_pause_after_first_sentence(std::string_view raw_text);

}  // namespace dsynth
