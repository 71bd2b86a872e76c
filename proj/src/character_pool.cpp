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

#include "dsynth/character_pool.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dsynth/rng.hpp"
#include "json.hpp"

namespace dsynth {

using nlohmann::json;

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::kKinship:
      return "kinship";
    case RelationKind::kFriendship:
      return "friendship";
    case RelationKind::kColleague:
      return "colleague";
  }
  return "friendship";
}

std::optional<RelationKind> parse_relation_kind(std::string_view text) {
  if (text == "kinship") return RelationKind::kKinship;
  if (text == "friendship") return RelationKind::kFriendship;
  if (text == "colleague") return RelationKind::kColleague;
  return std::nullopt;
}

CharacterPool::CharacterPool(std::vector<Character> characters,
                             std::filesystem::path base_dir)
    : characters_(std::move(characters)), base_dir_(std::move(base_dir)) {
  for (std::size_t i = 0; i < characters_.size(); ++i) {
    index_.emplace(characters_[i].id, i);  // first occurrence wins
  }
}

const Character* CharacterPool::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &characters_[it->second];
}

const Character& CharacterPool::at(std::string_view id) const {
  const Character* character = find(id);
  if (!character) {
    throw ValidationError("unknown character id: " + std::string(id));
  }
  return *character;
}

namespace {

bool is_uri(std::string_view ref) {
  return ref.find("://") != std::string_view::npos;
}

}  // namespace

std::filesystem::path CharacterPool::resolve_audio(
    const Character& character) const {
  std::string_view ref = character.audio_ref;
  if (ref.starts_with("file://")) ref.remove_prefix(7);
  std::filesystem::path path{std::string(ref)};
  if (path.is_absolute() || is_uri(ref) || base_dir_.empty()) return path;
  return base_dir_ / path;
}

std::vector<Violation> validate_pool(const CharacterPool& pool,
                                     const PoolValidationOptions& options) {
  std::vector<Violation> out;
  const auto& chars = pool.characters();
  if (chars.size() < 2) {
    out.push_back({std::string(pool_codes::kTooFewCharacters), "",
                   "pool has " + std::to_string(chars.size()) +
                       " character(s); at least 2 are required"});
  }

  std::set<std::string> seen;
  for (const Character& c : chars) {
    if (c.id.empty()) {
      out.push_back({std::string(pool_codes::kEmptyId), c.name,
                     "character '" + c.name + "' has an empty id"});
      continue;
    }
    if (!seen.insert(c.id).second) {
      out.push_back({std::string(pool_codes::kDuplicateId), c.id,
                     "duplicate character id '" + c.id + "'"});
    }
  }

  // a kind mismatch looks asymmetric from both ends; report the pair once
  std::set<std::pair<std::string, std::string>> asymmetric_pairs;
  for (const Character& c : chars) {
    for (const Relation& rel : c.relations) {
      if (rel.peer == c.id) {
        out.push_back({std::string(pool_codes::kSelfRelation), c.id,
                       "character '" + c.id + "' lists itself as a peer"});
        continue;
      }
      const Character* peer = pool.find(rel.peer);
      if (!peer) {
        out.push_back({std::string(pool_codes::kUnknownPeer), c.id,
                       "character '" + c.id + "' lists unknown peer '" +
                           rel.peer + "'"});
        continue;
      }
      const bool mirrored = std::any_of(
          peer->relations.begin(), peer->relations.end(),
          [&](const Relation& back) {
            return back.peer == c.id && back.kind == rel.kind;
          });
      if (!mirrored && asymmetric_pairs.emplace(std::min(c.id, rel.peer), std::max(c.id, rel.peer)).second) {
        out.push_back({std::string(pool_codes::kAsymmetricRelation), c.id,
                       "character '" + c.id + "' lists '" + rel.peer + "' as " +
                           std::string(to_string(rel.kind)) +
                           " but the reverse edge is missing"});
      }
    }
  }

  if (options.check_audio) {
    for (const Character& c : chars) {
      if (is_uri(c.audio_ref) && !std::string_view(c.audio_ref).starts_with("file://")) {
        continue;  // remote resources are checked by the synthesizer backend
      }
      const auto path = pool.resolve_audio(c);
      std::ifstream probe(path, std::ios::binary);
      if (c.audio_ref.empty() || !probe.good() ||
          std::filesystem::is_directory(path)) {
        out.push_back({std::string(pool_codes::kUnreadableAudio), c.id,
                       "audio_ref of '" + c.id + "' is not readable: " +
                           path.string()});
      }
    }
  }
  return out;
}

namespace {

std::string require_string(const json& obj, const char* key,
                           const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(context + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

Character parse_character(const json& obj, std::size_t position) {
  std::string context = "characters[" + std::to_string(position) + "]";
  if (!obj.is_object()) throw ParseError(context + " is not an object");
  Character c;
  c.id = require_string(obj, "id", context);
  context += " (id '" + c.id + "')";
  c.name = require_string(obj, "name", context);
  const std::string lang = require_string(obj, "language", context);
  auto parsed_lang = parse_language(lang);
  if (!parsed_lang) {
    throw ParseError(context + ": unsupported language '" + lang + "'");
  }
  c.language = *parsed_lang;
  c.audio_ref = require_string(obj, "audio_ref", context);

  auto prof = obj.find("profile");
  if (prof == obj.end() || !prof->is_object()) {
    throw ParseError(context + ": missing object field 'profile'");
  }
  auto age = prof->find("age");
  if (age == prof->end() || !age->is_number_integer()) {
    throw ParseError(context + ": profile.age must be an integer");
  }
  c.profile.age = age->get<int>();
  c.profile.gender = require_string(*prof, "gender", context + " profile");
  c.profile.personality =
      require_string(*prof, "personality", context + " profile");
  c.profile.speaking_style =
      require_string(*prof, "speaking_style", context + " profile");
  for (const auto& [key, value] : prof->items()) {
    if (key == "age" || key == "gender" || key == "personality" ||
        key == "speaking_style") {
      continue;
    }
    c.profile.extra[key] =
        value.is_string() ? value.get<std::string>() : value.dump();
  }

  if (auto rels = obj.find("relations"); rels != obj.end()) {
    if (!rels->is_array()) throw ParseError(context + ": relations must be an array");
    for (const json& r : *rels) {
      if (!r.is_object()) throw ParseError(context + ": relation is not an object");
      Relation rel;
      rel.peer = require_string(r, "peer", context + " relation");
      const std::string kind = require_string(r, "kind", context + " relation");
      auto parsed_kind = parse_relation_kind(kind);
      if (!parsed_kind) {
        throw ParseError(context + ": relation kind '" + kind +
                         "' is not one of kinship, friendship, colleague");
      }
      rel.kind = *parsed_kind;
      if (auto note = r.find("note"); note != r.end() && note->is_string()) {
        rel.note = note->get<std::string>();
      }
      c.relations.push_back(std::move(rel));
    }
  }
  return c;
}

}  // namespace

CharacterPool parse_pool(std::string_view json_text,
                         const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pool document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("characters") ||
      !doc["characters"].is_array()) {
    throw ParseError("pool document needs a top-level 'characters' array");
  }
  std::vector<Character> characters;
  std::size_t position = 0;
  for (const json& obj : doc["characters"]) {
    characters.push_back(parse_character(obj, position++));
  }
  return CharacterPool(std::move(characters), base_dir);
}

CharacterPool load_pool_from_string(std::string_view json_text,
                                    const std::filesystem::path& base_dir,
                                    const PoolValidationOptions& options) {
  CharacterPool pool = parse_pool(json_text, base_dir);
  auto violations = validate_pool(pool, options);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid character pool:";
    for (const auto& v : violations) {
      msg << " [" << v.code << " " << v.subject << "] " << v.message << ";";
    }
    throw ValidationError(msg.str());
  }
  return pool;
}

CharacterPool load_pool(const std::filesystem::path& path,
                        const PoolValidationOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open pool file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_pool_from_string(buffer.str(), path.parent_path(), options);
}

std::string serialize_pool(const CharacterPool& pool) {
  json chars = json::array();
  for (const Character& c : pool.characters()) {
    json profile = {{"age", c.profile.age},
                    {"gender", c.profile.gender},
                    {"personality", c.profile.personality},
                    {"speaking_style", c.profile.speaking_style}};
    for (const auto& [key, value] : c.profile.extra) profile[key] = value;
    json rels = json::array();
    for (const Relation& r : c.relations) {
      json rel = {{"peer", r.peer}, {"kind", std::string(to_string(r.kind))}};
      if (!r.note.empty()) rel["note"] = r.note;
      rels.push_back(std::move(rel));
    }
    chars.push_back({{"id", c.id},
                     {"name", c.name},
                     {"language", std::string(to_string(c.language))},
                     {"profile", std::move(profile)},
                     {"audio_ref", c.audio_ref},
                     {"relations", std::move(rels)}});
  }
  return json{{"characters", std::move(chars)}}.dump(2) + "\n";
}

namespace {

bool related(const Character& a, const Character& b) {
  auto lists = [](const Character& from, const Character& to) {
    return std::any_of(from.relations.begin(), from.relations.end(),
                       [&](const Relation& r) { return r.peer == to.id; });
  };
  return lists(a, b) || lists(b, a);
}

}  // namespace

std::vector<Character> sample_participants(const CharacterPool& pool,
                                           std::size_t count, Language language,
                                           std::uint64_t rng_seed,
                                           bool prefer_related) {
  std::vector<const Character*> candidates;
  for (const Character& c : pool.characters()) {
    if (c.language == language) candidates.push_back(&c);
  }
  if (count < 2 || candidates.size() < count) {
    throw InsufficientCharacters(
        "requested " + std::to_string(count) + " " +
        std::string(to_string(language)) + " participants; pool has " +
        std::to_string(candidates.size()));
  }

  Rng rng(rng_seed);
  rng.shuffle(candidates);

  std::vector<const Character*> chosen;
  if (!prefer_related) {
    chosen.assign(candidates.begin(), candidates.begin() + count);
  } else {
    chosen.push_back(candidates.front());
    std::vector<const Character*> rest(candidates.begin() + 1, candidates.end());
    while (chosen.size() < count) {
      std::size_t best = 0;
      int best_edges = -1;
      for (std::size_t i = 0; i < rest.size(); ++i) {
        int edges = 0;
        for (const Character* member : chosen) edges += related(*rest[i], *member);
        if (edges > best_edges) {
          best_edges = edges;
          best = i;
        }
      }
      chosen.push_back(rest[best]);
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }

  std::vector<Character> out;
  out.reserve(count);
  for (const Character* c : chosen) out.push_back(*c);
  return out;
}

}  // namespace dsynth
