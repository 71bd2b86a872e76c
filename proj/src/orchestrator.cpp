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

#include "dsynth/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "dsynth/rng.hpp"

namespace dsynth {

std::string_view to_string(VariantMode mode) {
  switch (mode) {
    case VariantMode::kWriterOnly:
      return "writer_only";
    case VariantMode::kWriterSelfRefine:
      return "writer_self_refine";
    case VariantMode::kCriticLoop:
      return "critic_loop";
  }
  return "critic_loop";
}

std::optional<VariantMode> parse_variant_mode(std::string_view text) {
  for (auto m : {VariantMode::kWriterOnly, VariantMode::kWriterSelfRefine,
                 VariantMode::kCriticLoop}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

void PipelineVariant::validate() const {
  if (loops < 0) throw ConfigError("loops must be >= 0");
  if (mode == VariantMode::kWriterOnly && loops != 0) {
    throw ConfigError("writer_only requires loops = 0");
  }
  if (mode == VariantMode::kWriterSelfRefine && loops != 1) {
    throw ConfigError("writer_self_refine performs exactly one revision (loops = 1)");
  }
}

std::string PipelineVariant::label() const {
  if (mode == VariantMode::kCriticLoop) {
    return "critic_loop(T=" + std::to_string(loops) + ")";
  }
  return std::string(to_string(mode));
}

double RetryPolicy::delay_before_attempt(int attempt) const {
  return base_delay_seconds * std::pow(backoff_factor, attempt - 2);
}

std::vector<std::string> default_topics() {
  return {"personal finance", "travel plans",     "workplace changes", "family gatherings",
          "health and fitness", "new technology", "school and study",  "food and cooking",
          "movies and music",   "sports",         "the environment",   "moving house"};
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kCompleted:
      return "completed";
    case RunStatus::kFailed:
      return "failed";
    case RunStatus::kCancelled:
      return "cancelled";
  }
  return "failed";
}

StageError::StageError(const StageFailure& failure, std::shared_ptr<PipelineRun> partial)
    : Error("StageError", partial->run_id + ": stage '" + failure.stage + "' at t=" +
                              std::to_string(failure.t) + " failed after " +
                              std::to_string(failure.attempts) + " attempt(s): " +
                              failure.message),
      failure_(failure),
      partial_(std::move(partial)) {}

std::uint64_t stream_seed(std::uint64_t run_seed, SeedStream stream) {
  return derive_stream_seed(run_seed, static_cast<std::uint64_t>(stream));
}

std::string make_run_id(Language language, std::size_t ordinal, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%05zu-%08llx", language == Language::kCN ? "cn" : "en",
                ordinal, static_cast<unsigned long long>(seed & 0xFFFFFFFFULL));
  return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct StageOutcome {
  int attempts = 0;
};

class StageFailed : public std::exception {
 public:
  explicit StageFailed(StageFailure failure) : failure(std::move(failure)) {}
  StageFailure failure;
};

// Runs `fn(corrective)` under the retry policy: BackendError is retried up to
// max_attempts with exponential backoff; MalformedOutputError is retried once
// with corrective = true.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, int t, const char* stage, int& attempts, Fn&& fn) {
  bool corrective = false;
  int backend_failures = 0;
  for (;;) {
    ++attempts;
    try {
      return fn(corrective);
    } catch (const MalformedOutputError& e) {
      if (corrective) throw StageFailed({t, stage, e.kind(), e.what(), attempts});
      corrective = true;
    } catch (const BackendError& e) {
      ++backend_failures;
      if (backend_failures >= policy.max_attempts) {
        throw StageFailed({t, stage, e.kind(), e.what(), attempts});
      }
      const double delay = policy.delay_before_attempt(backend_failures + 1);
      if (policy.sleep) {
        policy.sleep(delay);
      } else {
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
    } catch (const Error& e) {
      throw StageFailed({t, stage, e.kind(), e.what(), attempts});
    }
  }
}

constexpr std::string_view kCorrectiveNote =
    "Your previous reply could not be used. Reply with exactly one fenced json block "
    "containing the array of {\"speaker\", \"text\"} objects and nothing else; use only "
    "the listed character ids as speakers.";

std::size_t draw_participant_count(const PipelineConfig& config, std::size_t available,
                                   Rng& rng) {
  double total = 0.0;
  for (const auto& [count, weight] : config.participant_weights) {
    if (count >= 2 && static_cast<std::size_t>(count) <= available && weight > 0) total += weight;
  }
  if (total <= 0.0) return available;
  double r = rng.unit() * total;
  std::size_t chosen = available;
  for (const auto& [count, weight] : config.participant_weights) {
    if (count < 2 || static_cast<std::size_t>(count) > available || weight <= 0) continue;
    chosen = static_cast<std::size_t>(count);
    if (r < weight) break;
    r -= weight;
  }
  return chosen;
}

}  // namespace

PipelineRun run_pipeline(const CharacterPool& pool, const PipelineConfig& config,
                         std::uint64_t seed, const Backends& backends, std::size_t ordinal) {
  config.variant.validate();
  auto run = std::make_shared<PipelineRun>();
  run->run_id = make_run_id(config.language, ordinal, seed);
  run->ordinal = ordinal;
  run->seed = seed;
  run->config = config;
  run->backend_ids = {{"writer", backends.writer.id()},
                      {"synthesizer", backends.synthesizer.id()},
                      {"critic", backends.critic.id()}};

  const RetryPolicy& retry = config.retry;
  int current_t = 0;
  try {
    std::vector<Character> participants;
    try {
      std::size_t available = 0;
      for (const auto& c : pool.characters()) available += c.language == config.language;
      Rng count_rng(stream_seed(seed, SeedStream::kCount));
      const std::size_t count = draw_participant_count(config, available, count_rng);
      participants = sample_participants(pool, count, config.language,
                                         stream_seed(seed, SeedStream::kParticipants),
                                         config.prefer_related);
    } catch (const Error& e) {
      throw StageFailed({0, "sample", e.kind(), e.what(), 1});
    }
    for (const auto& c : participants) run->participants.push_back(c.id);
    if (!config.topics.empty()) {
      Rng topic_rng(stream_seed(seed, SeedStream::kTopic));
      run->topic = config.topics[topic_rng.below(config.topics.size())];
    }

    WriterPromptOptions options;
    options.topic = run->topic;
    options.params = config.generation;
    options.params.seed = stream_seed(seed, SeedStream::kWriter);

    auto write_and_synthesize = [&](int t, WriterRequest request) {
      current_t = t;
      IterationRecord record;
      record.t = t;
      auto start = Clock::now();
      // history keeps the request that produced the script, corrective note included
      record.script = with_retry(retry, t, "write", record.write_attempts, [&](bool corrective) {
        record.writer_request = request;
        if (corrective) record.writer_request.corrective_note = std::string(kCorrectiveNote);
        return write_script(backends.writer, record.writer_request, pool, config.bounds, config.markup);
      });
      record.wall_time.write = seconds_since(start);

      start = Clock::now();
      int synth_attempts = 0;
      record.synthesis = with_retry(retry, t, "synthesize", synth_attempts, [&](bool) {
        return synthesize(backends.synthesizer, record.script, pool);
      });
      record.wall_time.synthesize = seconds_since(start);
      if (!run->iterations.empty()) {
        record.utterance_delta =
            static_cast<long>(record.script.utterances.size()) -
            static_cast<long>(run->iterations.back().script.utterances.size());
      }
      run->iterations.push_back(std::move(record));
    };

    auto critique_last = [&]() {
      IterationRecord& last = run->iterations.back();
      current_t = last.t;
      const auto start = Clock::now();
      int attempts = 0;
      last.feedback = with_retry(retry, last.t, "critique", attempts, [&](bool) {
        return critique(backends.critic, last.synthesis, last.script);
      });
      last.wall_time.critique = seconds_since(start);
    };

    write_and_synthesize(0, build_writer_prompt(participants, std::nullopt, options));

    switch (config.variant.mode) {
      case VariantMode::kWriterOnly:
        break;
      case VariantMode::kWriterSelfRefine: {
        CritiqueFeedback self_notes;
        self_notes.global_notes =
            "No external review is available; refine the script on your own judgement.";
        WriterPromptOptions self_options = options;
        self_options.self_refine = true;
        write_and_synthesize(
            1, build_writer_prompt(participants,
                                   std::make_pair(run->iterations.back().script, self_notes),
                                   self_options));
        break;
      }
      case VariantMode::kCriticLoop:
        for (int t = 1; t <= config.variant.loops; ++t) {
          critique_last();
          const IterationRecord& prev = run->iterations.back();
          write_and_synthesize(
              t, build_writer_prompt(participants, std::make_pair(prev.script, *prev.feedback),
                                     options));
        }
        if (config.critique_final) critique_last();
        break;
    }
  } catch (StageFailed& failed) {
    run->status = RunStatus::kFailed;
    run->failure = failed.failure;
    throw StageError(failed.failure, run);
  } catch (const Error& e) {
    StageFailure failure{current_t, "pipeline", e.kind(), e.what(), 1};
    run->status = RunStatus::kFailed;
    run->failure = failure;
    throw StageError(failure, run);
  }
  run->status = RunStatus::kCompleted;
  return std::move(*run);
}

std::size_t BatchResult::completed() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.status == RunStatus::kCompleted;
  return n;
}

namespace {

PipelineRun run_one(const CharacterPool& pool, const PipelineConfig& config, std::size_t ordinal,
                    std::uint64_t master_seed, const Backends& backends,
                    const std::atomic<bool>* stop) {
  const std::uint64_t seed = derive_run_seed(master_seed, ordinal);
  if (stop && stop->load()) {
    PipelineRun cancelled;
    cancelled.run_id = make_run_id(config.language, ordinal, seed);
    cancelled.ordinal = ordinal;
    cancelled.seed = seed;
    cancelled.config = config;
    cancelled.status = RunStatus::kCancelled;
    return cancelled;
  }
  try {
    return run_pipeline(pool, config, seed, backends, ordinal);
  } catch (const StageError& e) {
    return e.partial_run();
  } catch (const std::exception& e) {
    PipelineRun failed;
    failed.run_id = make_run_id(config.language, ordinal, seed);
    failed.ordinal = ordinal;
    failed.seed = seed;
    failed.config = config;
    failed.status = RunStatus::kFailed;
    failed.failure = StageFailure{0, "pipeline", "InternalError", e.what(), 0};
    return failed;
  }
}

}  // namespace

BatchResult run_batch(const CharacterPool& pool, const PipelineConfig& config,
                      std::size_t n_dialogues, std::uint64_t master_seed, int parallelism,
                      const Backends& backends, const std::atomic<bool>* stop) {
  if (n_dialogues == 0) throw ConfigError("n_dialogues must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  config.variant.validate();

  std::vector<PipelineRun> runs(n_dialogues);
  if (parallelism == 1) {
    for (std::size_t i = 0; i < n_dialogues; ++i) {
      runs[i] = run_one(pool, config, i, master_seed, backends, stop);
    }
  } else {
    const auto n = static_cast<std::int64_t>(n_dialogues);
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ordinal = static_cast<std::size_t>(i);
      runs[ordinal] = run_one(pool, config, ordinal, master_seed, backends, stop);
    }
  }

  BatchResult result;
  result.runs = std::move(runs);
  for (const auto& r : result.runs) {
    if (r.status == RunStatus::kFailed) result.failed_ordinals.push_back(r.ordinal);
    if (r.status == RunStatus::kCancelled) result.cancelled_ordinals.push_back(r.ordinal);
  }
  return result;
}

}  // namespace dsynth
