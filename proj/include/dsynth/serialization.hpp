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

#include "dsynth/agents.hpp"
#include "dsynth/orchestrator.hpp"
#include "dsynth/script.hpp"
#include "json.hpp"

// JSON forms of pipeline values, shared by the history writer, the manifest
// and the CLI.
namespace dsynth {

nlohmann::json script_to_json(const DialogueScript& script);
DialogueScript script_from_json(const nlohmann::json& doc, const MarkupConfig& markup = {});

nlohmann::json feedback_to_json(const CritiqueFeedback& feedback);
CritiqueFeedback feedback_from_json(const nlohmann::json& doc);

// Embeds the prior script and feedback verbatim.
nlohmann::json writer_request_to_json(const WriterRequest& request);

nlohmann::json pipeline_config_to_json(const PipelineConfig& config);

// Run manifest: identity, status, participants and per-iteration summaries.
// `include_timing` adds wall-clock stage times, which vary between runs.
nlohmann::json run_summary_to_json(const PipelineRun& run, bool include_timing);

}  // namespace dsynth
