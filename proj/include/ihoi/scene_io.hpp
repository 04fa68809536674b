#pragma once

#include <string>
#include <vector>

#include "ihoi/types.hpp"

namespace ihoi {

/// Reads a JSONL scene file (one scene per line). Every scene is validated
/// against the configured dimensions; parse errors carry the line number.
std::vector<Scene> load_scenes(const std::string& path, int c_obj, int d_a);

/// Writes scenes as JSONL. Numbers round-trip exactly through load_scenes.
void save_scenes(const std::string& path, const std::vector<Scene>& scenes);

ActionVocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const std::string& path, const ActionVocabulary& vocab);

/// Canonical serialization of the vocabulary, used for checkpoint hashing.
std::string vocabulary_canonical(const ActionVocabulary& vocab);

}  // namespace ihoi
