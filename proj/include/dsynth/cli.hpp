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
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dsynth/http_backends.hpp"
#include "dsynth/mock_backends.hpp"
#include "dsynth/orchestrator.hpp"
#include "json.hpp"

namespace dsynth {

// Stable exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,        // validation or evaluation failure
  kExitConfig = 2,
  kExitBackend = 3,        // a run exhausted its retries
  kExitInterrupted = 130,  // drained after Ctrl-C
};

struct MockFaults {
  FaultKind kind = FaultKind::kBackendError;
  std::vector<std::size_t> ordinals;
  std::size_t failures = std::numeric_limits<std::size_t>::max();
};

struct BackendEndpoints {
  std::optional<Endpoint> writer, synthesizer, critic, predictor;
};

struct RunConfig {
  std::filesystem::path pool;
  std::size_t dialogues = 1;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::filesystem::path output_dir = "out";
  bool mock = false;
  std::optional<MockFaults> mock_faults;
  bool history_audio = true;
  std::string env_prefix = "DSYNTH";
  BackendEndpoints backends;
  PipelineConfig pipeline;
};

// Parses a config document. Relative paths resolve against base_dir. Keys are
// checked strictly; secrets are refused in favour of <PREFIX>_*_TOKEN
// variables. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Checks the cross-field invariants (n >= 1, T >= 0, parallelism >= 1, pool
// exists, endpoints present unless mock). Throws ConfigError.
void validate_run_config(const RunConfig& config);

// Effective configuration, as snapshotted next to the corpus.
nlohmann::json run_config_to_json(const RunConfig& config);

// Generation seeds the mock fault plan targets for the configured ordinals.
std::set<std::uint64_t> fault_seeds(const RunConfig& config);

// Entry point behind the dsynth binary. `stop` is polled between runs.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* stop = nullptr);

}  // namespace dsynth
