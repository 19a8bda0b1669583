// Copyright 2026 The unitts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unitts/common.hpp"
#include "unitts/corpus.hpp"

namespace unitts {

enum class TextMode { kCharacter, kPhoneme };
enum class UnkPolicy { kStrict, kLenient };

std::string to_string(TextMode mode);
TextMode parse_text_mode(const std::string& s);

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
// Emitted between words in phoneme mode.
inline constexpr const char* kWordBoundary = "|";

/// Per-language word -> IPA symbol list, one symbol set shared by all
/// languages. File format: language<TAB>word<TAB>sym1 sym2 ...
class PhonemeLexicon {
 public:
  void add(const std::string& language, const std::string& word, std::vector<std::string> symbols);
  const std::vector<std::string>* find(const std::string& language, const std::string& word) const;
  std::size_t size() const;

  static PhonemeLexicon parse(const std::string& text);
  static PhonemeLexicon load(const std::string& path);
  std::string format() const;

 private:
  std::map<std::string, std::map<std::string, std::vector<std::string>>> entries_;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(TextMode mode, std::vector<std::string> symbols);

  TextMode mode() const { return mode_; }
  // Symbols excluding PAD/UNK; symbol i has id i + 2.
  const std::vector<std::string>& symbols() const { return symbols_; }
  int size() const { return static_cast<int>(symbols_.size()) + 2; }
  std::optional<int> id(const std::string& symbol) const;
  const std::string& symbol(int id) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary&) const = default;

 private:
  TextMode mode_ = TextMode::kCharacter;
  std::vector<std::string> symbols_;
};

struct TokenSequence {
  std::vector<int> ids;
  std::string language;

  std::size_t size() const { return ids.size(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Collapses whitespace runs to one space and trims both ends. Case is kept.
std::string normalize_text(const std::string& text);

Vocabulary build_vocabulary(const std::vector<Utterance>& utterances, TextMode mode,
                            const PhonemeLexicon* lexicon = nullptr, UnkPolicy policy = UnkPolicy::kStrict);

TokenSequence encode(const std::string& text, const std::string& language, const Vocabulary& vocab,
                     const PhonemeLexicon* lexicon = nullptr, UnkPolicy policy = UnkPolicy::kStrict);

/// Character mode only.
std::string decode(const TokenSequence& tokens, const Vocabulary& vocab);

}  // namespace unitts
