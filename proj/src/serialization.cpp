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

#include "dsynth/serialization.hpp"

#include "dsynth/error.hpp"

namespace dsynth {

using nlohmann::json;

json script_to_json(const DialogueScript& script) {
  json utterances = json::array();
  for (const Utterance& u : script.utterances) {
    utterances.push_back({{"speaker_id", u.speaker_id}, {"raw_text", u.raw_text}});
  }
  return {{"language", std::string(to_string(script.language))},
          {"topic_tag", script.topic_tag ? json(*script.topic_tag) : json(nullptr)},
          {"iteration_index", script.iteration_index},
          {"participants", script.participants},
          {"utterances", std::move(utterances)}};
}

DialogueScript script_from_json(const json& doc, const MarkupConfig& markup) {
  try {
    DialogueScript script;
    auto lang = parse_language(doc.at("language").get<std::string>());
    if (!lang) throw ParseError("script has an unsupported language");
    script.language = *lang;
    if (doc.contains("topic_tag") && doc["topic_tag"].is_string()) {
      script.topic_tag = doc["topic_tag"].get<std::string>();
    }
    script.iteration_index = doc.at("iteration_index").get<int>();
    script.participants = doc.at("participants").get<std::vector<std::string>>();
    std::size_t index = 0;
    for (const json& u : doc.at("utterances")) {
      script.utterances.push_back(make_utterance(u.at("speaker_id").get<std::string>(),
                                                 u.at("raw_text").get<std::string>(), index++,
                                                 markup));
    }
    return script;
  } catch (const json::exception& e) {
    throw ParseError(std::string("script has invalid structure: ") + e.what());
  }
}

json feedback_to_json(const CritiqueFeedback& feedback) {
  json entries = json::array();
  for (const UtteranceFeedback& f : feedback.per_utterance) {
    json criteria = json::array();
    for (Criterion c : f.criteria) criteria.push_back(std::string(to_string(c)));
    entries.push_back({{"index", f.index}, {"suggestion", f.suggestion}, {"criteria", criteria}});
  }
  return {{"per_utterance", std::move(entries)},
          {"global_notes", feedback.global_notes ? json(*feedback.global_notes) : json(nullptr)}};
}

CritiqueFeedback feedback_from_json(const json& doc) {
  try {
    CritiqueFeedback fb;
    for (const json& e : doc.at("per_utterance")) {
      UtteranceFeedback f;
      f.index = e.at("index").get<std::size_t>();
      f.suggestion = e.at("suggestion").get<std::string>();
      for (const json& c : e.at("criteria")) {
        auto parsed = parse_criterion(c.get<std::string>());
        if (!parsed) throw ParseError("unknown criterion " + c.dump());
        f.criteria.push_back(*parsed);
      }
      fb.per_utterance.push_back(std::move(f));
    }
    if (doc.contains("global_notes") && doc["global_notes"].is_string()) {
      fb.global_notes = doc["global_notes"].get<std::string>();
    }
    return fb;
  } catch (const json::exception& e) {
    throw ParseError(std::string("feedback has invalid structure: ") + e.what());
  }
}

json writer_request_to_json(const WriterRequest& request) {
  json params = {{"temperature", request.params.temperature},
                 {"max_tokens", request.params.max_tokens},
                 {"seed", request.params.seed ? json(*request.params.seed) : json(nullptr)}};
  return {{"system_prompt", request.system_prompt},
          {"user_message", request.user_message()},
          {"participant_ids", request.participant_ids},
          {"language", std::string(to_string(request.language))},
          {"topic", request.topic ? json(*request.topic) : json(nullptr)},
          {"self_refine", request.self_refine},
          {"params", std::move(params)},
          {"prior_script",
           request.prior_script ? script_to_json(*request.prior_script) : json(nullptr)},
          {"prior_feedback",
           request.prior_feedback ? feedback_to_json(*request.prior_feedback) : json(nullptr)}};
}

json pipeline_config_to_json(const PipelineConfig& config) {
  json weights = json::object();
  for (const auto& [count, weight] : config.participant_weights) {
    weights[std::to_string(count)] = weight;
  }
  json pauses = json::array();
  for (const auto& p : config.markup.pause_vocabulary) pauses.push_back(p);
  return {{"variant", {{"mode", std::string(to_string(config.variant.mode))},
                       {"loops", config.variant.loops},
                       {"label", config.variant.label()}}},
          {"language", std::string(to_string(config.language))},
          {"participant_weights", std::move(weights)},
          {"prefer_related", config.prefer_related},
          {"topics", config.topics},
          {"generation", {{"temperature", config.generation.temperature},
                          {"max_tokens", config.generation.max_tokens}}},
          {"retry", {{"max_attempts", config.retry.max_attempts},
                     {"base_delay_seconds", config.retry.base_delay_seconds},
                     {"backoff_factor", config.retry.backoff_factor}}},
          {"critique_final", config.critique_final},
          {"audio", {{"gap_seconds", config.gap_seconds}, {"sample_rate", config.sample_rate}}},
          {"markup", {{"pause_vocabulary", std::move(pauses)},
                      {"emphasis_open", config.markup.emphasis_open},
                      {"emphasis_close", config.markup.emphasis_close}}},
          {"bounds", {{"min_utterances", config.bounds.min_utterances},
                      {"max_utterances", config.bounds.max_utterances}}}};
}

json run_summary_to_json(const PipelineRun& run, bool include_timing) {
  json iterations = json::array();
  for (const IterationRecord& rec : run.iterations) {
    json it = {{"t", rec.t},
               {"utterances", rec.script.utterances.size()},
               {"utterance_delta", rec.utterance_delta},
               {"write_attempts", rec.write_attempts},
               {"has_feedback", rec.feedback.has_value()},
               {"synthesis_backend", rec.synthesis.backend_id}};
    if (include_timing) {
      it["wall_time"] = {{"write", rec.wall_time.write},
                         {"synthesize", rec.wall_time.synthesize},
                         {"critique", rec.wall_time.critique}};
    }
    iterations.push_back(std::move(it));
  }
  json failure = nullptr;
  if (run.failure) {
    failure = {{"t", run.failure->t},
               {"stage", run.failure->stage},
               {"error_kind", run.failure->error_kind},
               {"message", run.failure->message},
               {"attempts", run.failure->attempts}};
  }
  return {{"run_id", run.run_id},
          {"ordinal", run.ordinal},
          {"seed", run.seed},
          {"status", std::string(to_string(run.status))},
          {"variant", run.config.variant.label()},
          {"participants", run.participants},
          {"topic", run.topic ? json(*run.topic) : json(nullptr)},
          {"backend_ids", run.backend_ids},
          {"iterations", std::move(iterations)},
          {"failure", std::move(failure)}};
}

}  // namespace dsynth
