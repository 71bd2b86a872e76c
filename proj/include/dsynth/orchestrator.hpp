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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsynth/agents.hpp"
#include "dsynth/character_pool.hpp"
#include "dsynth/error.hpp"
#include "dsynth/script.hpp"

namespace dsynth {

enum class VariantMode { kWriterOnly, kWriterSelfRefine, kCriticLoop };

std::string_view to_string(VariantMode mode);
std::optional<VariantMode> parse_variant_mode(std::string_view text);

// writer_only has loops = 0; writer_self_refine has exactly one writer
// revision (loops = 1) and never calls the critic; critic_loop runs `loops`
// critique/rewrite/resynthesize rounds.
struct PipelineVariant {
  VariantMode mode = VariantMode::kCriticLoop;
  int loops = 2;

  // Throws ConfigError for combinations the modes forbid.
  void validate() const;
  std::string label() const;

  static PipelineVariant writer_only() { return {VariantMode::kWriterOnly, 0}; }
  static PipelineVariant self_refine() { return {VariantMode::kWriterSelfRefine, 1}; }
  static PipelineVariant critic_loop(int loops) { return {VariantMode::kCriticLoop, loops}; }
};

struct RetryPolicy {
  int max_attempts = 3;
  double base_delay_seconds = 1.0;
  double backoff_factor = 2.0;
  // Replaced in tests to skip real sleeping. Receives the delay in seconds.
  std::function<void(double)> sleep;

  double delay_before_attempt(int attempt) const;  // attempt >= 2
};

struct PipelineConfig {
  PipelineVariant variant;
  Language language = Language::kEN;
  // Weight per participant count; the drawn count is clipped to the number of
  // characters available in `language`.
  std::map<int, double> participant_weights{{2, 0.3}, {3, 0.4}, {4, 0.2}, {5, 0.1}};
  bool prefer_related = true;
  std::vector<std::string> topics;
  GenerationParams generation;
  RetryPolicy retry;
  bool critique_final = false;
  double gap_seconds = 0.3;
  int sample_rate = 22050;
  MarkupConfig markup;
  ScriptBounds bounds;
};

std::vector<std::string> default_topics();

struct Backends {
  WriterBackend& writer;
  SynthesizerBackend& synthesizer;
  CriticBackend& critic;
};

struct StageTiming {
  double write = 0.0;
  double synthesize = 0.0;
  double critique = 0.0;
};

struct IterationRecord {
  int t = 0;
  WriterRequest writer_request;
  DialogueScript script;
  SynthesisResult synthesis;
  std::optional<CritiqueFeedback> feedback;
  StageTiming wall_time;
  // Utterance count minus the previous iteration's (0 at t = 0).
  long utterance_delta = 0;
  int write_attempts = 0;
};

enum class RunStatus { kCompleted, kFailed, kCancelled };

std::string_view to_string(RunStatus status);

struct StageFailure {
  int t = 0;
  std::string stage;       // "sample", "write", "synthesize", "critique"
  std::string error_kind;  // kind() of the underlying error
  std::string message;
  int attempts = 0;
};

struct PipelineRun {
  std::string run_id;
  std::size_t ordinal = 0;
  std::uint64_t seed = 0;
  PipelineConfig config;
  std::vector<std::string> participants;
  std::optional<std::string> topic;
  std::vector<IterationRecord> iterations;
  RunStatus status = RunStatus::kCompleted;
  std::optional<StageFailure> failure;
  std::map<std::string, std::string> backend_ids;

  // The last record, holding {S_T, D_T}.
  const IterationRecord& final() const { return iterations.back(); }
};

// A stage that exhausted its retries. Carries the partial run (status failed,
// completed iterations intact).
class StageError : public Error {
 public:
  StageError(const StageFailure& failure, std::shared_ptr<PipelineRun> partial);

  const StageFailure& failure() const { return failure_; }
  const std::string& run_id() const { return partial_->run_id; }
  const PipelineRun& partial_run() const { return *partial_; }

 private:
  StageFailure failure_;
  std::shared_ptr<PipelineRun> partial_;
};

// Stream ids for derive_stream_seed within one run.
enum class SeedStream : std::uint64_t { kCount = 1, kParticipants = 2, kTopic = 3, kWriter = 4 };

std::uint64_t stream_seed(std::uint64_t run_seed, SeedStream stream);

// Deterministic id "<lang>-<ordinal:05>-<seed low 32 bits, hex>".
std::string make_run_id(Language language, std::size_t ordinal, std::uint64_t seed);

// sample → write S_0 → synthesize D_0 → [critique F_{t-1} → rewrite S_t →
// synthesize D_t] x T. Throws StageError once a stage exhausts the retry
// policy.
PipelineRun run_pipeline(const CharacterPool& pool, const PipelineConfig& config,
                         std::uint64_t seed, const Backends& backends,
                         std::size_t ordinal = 0);

struct BatchResult {
  std::vector<PipelineRun> runs;  // ordinal order, failed ones included
  std::vector<std::size_t> failed_ordinals;
  std::vector<std::size_t> cancelled_ordinals;

  std::size_t completed() const;
};

// Run `ordinal` uses derive_run_seed(master_seed, ordinal). parallelism == 1
// is the serial reference; larger values run ordinals on an OpenMP team. The
// result does not depend on parallelism. Failures are collected, not thrown.
// When `stop` becomes true, runs not yet started are marked cancelled.
BatchResult run_batch(const CharacterPool& pool, const PipelineConfig& config,
                      std::size_t n_dialogues, std::uint64_t master_seed,
                      int parallelism, const Backends& backends,
                      const std::atomic<bool>* stop = nullptr);

}  // namespace dsynth
