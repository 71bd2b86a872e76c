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

#include "dsynth/http_backends.hpp"

#include <cstdlib>
#include <regex>

#include "dsynth/error.hpp"
#include "dsynth/io.hpp"
#include "httplib.h"

namespace dsynth {

using nlohmann::json;

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw ConfigError("invalid endpoint URL: " + url);
  ParsedUrl out;
  out.scheme = m[1];
  out.host = m[2];
  out.port = m[3].matched ? std::stoi(m[3]) : (out.scheme == "https" ? 443 : 80);
  out.path = m[4].matched ? std::string(m[4]) : "/";
  return out;
}

namespace {

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 256;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

HttpResponse post_json(const Endpoint& endpoint, const std::string& body) {
  const ParsedUrl url = parse_url(endpoint.url);
  httplib::Headers headers;
  if (!endpoint.token_env.empty()) {
    if (const char* token = std::getenv(endpoint.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  auto configure = [&](auto& client) {
    const auto secs = static_cast<time_t>(endpoint.timeout_seconds);
    const auto usecs = static_cast<time_t>((endpoint.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
  };

  httplib::Result res;
  if (url.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient client(url.host, url.port);
    configure(client);
    res = client.Post(url.path, headers, body, "application/json");
#else
    throw BackendError("https endpoints need a build with OpenSSL support: " + endpoint.url);
#endif
  } else {
    httplib::Client client(url.host, url.port);
    configure(client);
    res = client.Post(url.path, headers, body, "application/json");
  }
  if (!res) {
    throw BackendError("request to " + endpoint.url + " failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("request to " + endpoint.url + " returned HTTP " +
                           std::to_string(res->status),
                       res->status, excerpt(res->body));
  }
  return {res->status, res->body, res->get_header_value("Content-Type")};
}

json writer_request_body(const WriterRequest& request, const std::string& model) {
  json body = {{"model", model},
               {"messages", json::array({{{"role", "system"}, {"content", request.system_prompt}},
                                         {{"role", "user"}, {"content", request.user_message()}}})},
               {"temperature", request.params.temperature},
               {"max_tokens", request.params.max_tokens}};
  if (request.params.seed) body["seed"] = *request.params.seed;
  return body;
}

json critic_request_body(const CritiqueRequest& request, const std::string& model,
                         double temperature) {
  json parts = json::array();
  for (const ReviewClip& clip : request.clips) {
    parts.push_back({{"type", "text"},
                     {"text", "Sentence " + std::to_string(clip.utterance_index) + " (" +
                                  clip.speaker_id + "): " + clip.transcript}});
    parts.push_back({{"type", "input_audio"},
                     {"input_audio", {{"data", base64_encode(clip.wav)}, {"format", "wav"}}}});
  }
  return {{"model", model},
          {"messages", json::array({{{"role", "system"}, {"content", request.prompt}},
                                    {{"role", "user"}, {"content", parts}}})},
          {"temperature", temperature}};
}

json synthesis_request_body(const SynthesisRequest& request) {
  return {{"text", request.text},
          {"reference_audio", base64_encode(request.reference_audio)},
          {"language", std::string(to_string(request.language))}};
}

json predictor_request_body(const AudioSegment& audio) {
  const auto wav = encode_wav(audio);
  return {{"audio", base64_encode(wav)}, {"sample_rate", audio.sample_rate}};
}

std::string chat_completion_content(const std::string& response_body) {
  json doc;
  try {
    doc = json::parse(response_body);
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedOutputError("content is not a string", response_body);
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw MalformedOutputError(
        std::string("response lacks choices[0].message.content: ") + e.what(), response_body);
  }
}

std::string HttpWriter::id() const { return "http-writer:" + endpoint_.model; }

std::string HttpWriter::generate(const WriterRequest& request) {
  const auto res = post_json(endpoint_, writer_request_body(request, endpoint_.model).dump());
  return chat_completion_content(res.body);
}

std::string HttpCritic::id() const { return "http-critic:" + endpoint_.model; }

std::string HttpCritic::review(const CritiqueRequest& request) {
  const auto res =
      post_json(endpoint_, critic_request_body(request, endpoint_.model, temperature_).dump());
  return chat_completion_content(res.body);
}

std::string HttpSynthesizer::id() const {
  return "http-synthesizer:" + (endpoint_.model.empty() ? endpoint_.url : endpoint_.model);
}

std::vector<std::uint8_t> HttpSynthesizer::synthesize(const SynthesisRequest& request) {
  const auto res = post_json(endpoint_, synthesis_request_body(request).dump());
  return {res.body.begin(), res.body.end()};
}

double HttpPredictor::predict(const AudioSegment& audio) {
  const auto res = post_json(endpoint_, predictor_request_body(audio).dump());
  try {
    return json::parse(res.body).at("score").get<double>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("predictor reply lacks a numeric score: ") + e.what(),
                       res.status, excerpt(res.body));
  }
}

}  // namespace dsynth
