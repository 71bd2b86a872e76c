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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsynth/character_pool.hpp"
#include "dsynth/rng.hpp"
#include "dsynth/script.hpp"

namespace dsynth::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_tone_wav(const std::filesystem::path& path, int sample_rate, std::size_t samples);

Character make_character(const std::string& id, const std::string& name, Language language);
void relate(std::vector<Character>& chars, const std::string& a, const std::string& b,
            RelationKind kind, const std::string& note = {});

// n_en English and n_cn Chinese characters, each with a reference clip under
// dir/ref, linked in a symmetric ring per language.
CharacterPool make_pool(const std::filesystem::path& dir, std::size_t n_en, std::size_t n_cn);

// Refined rows of the worked financial-literacy example, verbatim.
const std::vector<std::string>& refined_example_rows();
// Speakers of those rows in order.
const std::vector<std::string>& refined_example_speakers();
inline constexpr const char* kRow1Plain =
    "You know, financial literacy is so crucial for young adults today. Wouldn't you agree, Mark?";

// A canonical utterance drawn from the markup grammar: non-adjacent plain
// runs, emphasis spans, pauses, optional trailing label.
struct GeneratedUtterance {
  std::vector<Segment> segments;
  std::optional<std::string> label;
  std::string canonical;  // render_markup output
  std::string noisy;      // same markup with irregular whitespace
};
GeneratedUtterance generate_utterance(Rng& rng);

// Top-down definitional recursion over suffixes, memoised on (i, j).
std::size_t edit_distance_oracle(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace dsynth::testing
