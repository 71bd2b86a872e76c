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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsynth/error.hpp"
#include "dsynth/language.hpp"

namespace dsynth {

enum class RelationKind { kKinship, kFriendship, kColleague };

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> parse_relation_kind(std::string_view text);

struct Relation {
  std::string peer;
  RelationKind kind = RelationKind::kFriendship;
  // Free-text note forwarded verbatim into the writer prompt.
  std::string note;

  bool operator==(const Relation&) const = default;
};

struct Profile {
  int age = 0;
  std::string gender;
  std::string personality;
  std::string speaking_style;
  // Extra profile keys, preserved and forwarded to prompts.
  std::map<std::string, std::string> extra;

  bool operator==(const Profile&) const = default;
};

struct Character {
  std::string id;
  std::string name;
  Language language = Language::kEN;
  Profile profile;
  // As written in the pool file; relative paths resolve against the pool
  // file's directory.
  std::string audio_ref;
  std::vector<Relation> relations;

  bool operator==(const Character&) const = default;
};

// Immutable after construction; safe to share read-only across workers.
class CharacterPool {
 public:
  CharacterPool() = default;
  CharacterPool(std::vector<Character> characters,
                std::filesystem::path base_dir = {});

  const std::vector<Character>& characters() const { return characters_; }
  std::size_t size() const { return characters_.size(); }
  const std::filesystem::path& base_dir() const { return base_dir_; }

  const Character* find(std::string_view id) const;
  const Character& at(std::string_view id) const;

  // audio_ref resolved against base_dir (unless absolute or a URI).
  std::filesystem::path resolve_audio(const Character& character) const;

  bool operator==(const CharacterPool& other) const {
    return characters_ == other.characters_;
  }

 private:
  std::vector<Character> characters_;
  std::filesystem::path base_dir_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Violation codes reported by validate_pool.
namespace pool_codes {
inline constexpr std::string_view kEmptyId = "EMPTY_ID";
inline constexpr std::string_view kDuplicateId = "DUPLICATE_ID";
inline constexpr std::string_view kUnknownPeer = "UNKNOWN_PEER";
inline constexpr std::string_view kSelfRelation = "SELF_RELATION";
inline constexpr std::string_view kAsymmetricRelation = "ASYMMETRIC_RELATION";
inline constexpr std::string_view kUnreadableAudio = "UNREADABLE_AUDIO";
inline constexpr std::string_view kTooFewCharacters = "TOO_FEW_CHARACTERS";
}  // namespace pool_codes

struct PoolValidationOptions {
  bool check_audio = true;
};

std::vector<Violation> validate_pool(const CharacterPool& pool,
                                     const PoolValidationOptions& options = {});

// Parses the pool document without validating invariants. Throws ParseError.
CharacterPool parse_pool(std::string_view json_text,
                         const std::filesystem::path& base_dir = {});

// Parses and validates. Throws ParseError or ValidationError; the
// ValidationError message names the offending character id(s).
CharacterPool load_pool_from_string(std::string_view json_text,
                                    const std::filesystem::path& base_dir,
                                    const PoolValidationOptions& options = {});
CharacterPool load_pool(const std::filesystem::path& path,
                        const PoolValidationOptions& options = {});

std::string serialize_pool(const CharacterPool& pool);

// Returns `count` distinct characters of `language`. With prefer_related, a
// random seed member is grown greedily by repeatedly adding the candidate with
// the most relation edges into the current selection. Pure function of its
// arguments. Throws InsufficientCharacters.
std::vector<Character> sample_participants(const CharacterPool& pool,
                                           std::size_t count, Language language,
                                           std::uint64_t rng_seed,
                                           bool prefer_related);

}  // namespace dsynth
