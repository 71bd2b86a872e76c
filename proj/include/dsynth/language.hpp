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

#include <optional>
#include <string>
#include <string_view>

namespace dsynth {

enum class Language { kCN, kEN };

inline std::string_view to_string(Language language) {
  return language == Language::kCN ? "CN" : "EN";
}

inline std::optional<Language> parse_language(std::string_view text) {
  if (text == "CN" || text == "cn" || text == "zh") return Language::kCN;
  if (text == "EN" || text == "en") return Language::kEN;
  return std::nullopt;
}

}  // namespace dsynth
