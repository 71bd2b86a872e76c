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

#include <string>

#include "dsynth/agents.hpp"
#include "dsynth/evaluation.hpp"
#include "json.hpp"

namespace dsynth {

struct Endpoint {
  std::string url;     // scheme://host[:port]/path
  std::string model;
  double timeout_seconds = 120.0;
  // Name of the environment variable holding the bearer token; unset or empty
  // means no Authorization header.
  std::string token_env;
};

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;
};

// Throws ConfigError for anything that is not http(s)://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

// Wire bodies, exposed so their shape can be tested without a server.
nlohmann::json writer_request_body(const WriterRequest& request, const std::string& model);
nlohmann::json critic_request_body(const CritiqueRequest& request, const std::string& model,
                                   double temperature);
nlohmann::json synthesis_request_body(const SynthesisRequest& request);
nlohmann::json predictor_request_body(const AudioSegment& audio);

// Pulls choices[0].message.content out of a chat-completion response body.
// Throws MalformedOutputError.
std::string chat_completion_content(const std::string& response_body);

// Chat-completion compatible writer: POST {model, messages, temperature, seed?}.
class HttpWriter final : public WriterBackend {
 public:
  explicit HttpWriter(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string id() const override;
  std::string generate(const WriterRequest& request) override;

 private:
  Endpoint endpoint_;
};

// Chat-completion compatible audio critic; each clip is attached as a base64
// WAV content part next to its transcript.
class HttpCritic final : public CriticBackend {
 public:
  explicit HttpCritic(Endpoint endpoint, double temperature = 0.2)
      : endpoint_(std::move(endpoint)), temperature_(temperature) {}
  std::string id() const override;
  std::string review(const CritiqueRequest& request) override;

 private:
  Endpoint endpoint_;
  double temperature_;
};

// POST {text, reference_audio (base64 WAV), language}; the reply body is WAV.
class HttpSynthesizer final : public SynthesizerBackend {
 public:
  explicit HttpSynthesizer(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string id() const override;
  std::vector<std::uint8_t> synthesize(const SynthesisRequest& request) override;

 private:
  Endpoint endpoint_;
};

// POST {audio (base64 WAV), sample_rate}; reply {"score": number}.
class HttpPredictor final : public ScorePredictor {
 public:
  explicit HttpPredictor(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  double predict(const AudioSegment& audio) override;

 private:
  Endpoint endpoint_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

// POSTs `body` with the endpoint's timeout and bearer token. Throws
// BackendError on transport failure or a non-2xx status (with a body excerpt).
HttpResponse post_json(const Endpoint& endpoint, const std::string& body);

}  // namespace dsynth
