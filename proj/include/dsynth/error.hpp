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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsynth {

// Root of every error this library throws. `kind()` is a stable
// machine-readable name used in logs and CLI reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : Error("ParseError", line ? "line " + std::to_string(line) + ": " + message
                                 : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("ValidationError", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("ConfigError", message) {}
};

class MarkupError : public Error {
 public:
  explicit MarkupError(const std::string& message)
      : Error("MarkupError", message) {}
};

class InsufficientCharacters : public Error {
 public:
  explicit InsufficientCharacters(const std::string& message)
      : Error("InsufficientCharacters", message) {}
};

// Transport or protocol failure talking to a model backend. `status` is the
// HTTP status when one was received, 0 otherwise.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, int status = 0,
               std::string body_excerpt = {})
      : Error("BackendError", message),
        status_(status),
        body_excerpt_(std::move(body_excerpt)) {}

  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

// The backend answered, but its text could not be turned into the expected
// structure. The raw reply is kept for logging.
class MalformedOutputError : public Error {
 public:
  MalformedOutputError(const std::string& message, std::string raw_text)
      : Error("MalformedOutputError", message), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string raw_text_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error("FormatError", message) {}
};

class ResampleError : public Error {
 public:
  explicit ResampleError(const std::string& message)
      : Error("ResampleError", message) {}
};

class EmptyInputError : public Error {
 public:
  EmptyInputError(std::string kind, const std::string& message)
      : Error(std::move(kind), message) {}
};

class OutOfRangeScore : public Error {
 public:
  explicit OutOfRangeScore(double score)
      : Error("OutOfRangeScore",
              "predictor score " + std::to_string(score) + " outside [1, 5]"),
        score_(score) {}

  double score() const { return score_; }

 private:
  double score_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IOError", message) {}
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id)
      : Error("DuplicateId", "dialogue id already present in corpus: " + id),
        id_(id) {}

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class MissingAudioError : public Error {
 public:
  explicit MissingAudioError(const std::string& path)
      : Error("MissingAudio", "referenced audio file not found: " + path),
        path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A machine-readable invariant violation; validators return lists of these
// instead of throwing.
struct Violation {
  std::string code;
  std::string subject;  // character id, speaker id, dialogue id, ...
  std::string message;

  bool operator==(const Violation&) const = default;
};

}  // namespace dsynth
