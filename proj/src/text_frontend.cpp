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

#include "unitts/text_frontend.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace unitts {

std::string to_string(TextMode mode) { return mode == TextMode::kCharacter ? "character" : "phoneme"; }

TextMode parse_text_mode(const std::string& s) {
  if (s == "character") return TextMode::kCharacter;
  if (s == "phoneme") return TextMode::kPhoneme;
  throw InvalidInput("unknown text mode '" + s + "' (expected character or phoneme)");
}

// --- lexicon -----------------------------------------------------------

void PhonemeLexicon::add(const std::string& language, const std::string& word, std::vector<std::string> symbols) {
  if (symbols.empty()) throw InvalidInput("lexicon entry for '" + word + "' has no symbols");
  for (const auto& s : symbols) {
    if (s == kWordBoundary) throw InvalidInput("lexicon symbol '|' is reserved for word boundaries");
  }
  entries_[language][word] = std::move(symbols);
}

const std::vector<std::string>* PhonemeLexicon::find(const std::string& language, const std::string& word) const {
  auto lang = entries_.find(language);
  if (lang == entries_.end()) return nullptr;
  auto it = lang->second.find(word);
  return it == lang->second.end() ? nullptr : &it->second;
}

std::size_t PhonemeLexicon::size() const {
  std::size_t n = 0;
  for (const auto& [_, words] : entries_) n += words.size();
  return n;
}

PhonemeLexicon PhonemeLexicon::parse(const std::string& text) {
  PhonemeLexicon lex;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw InvalidInput("lexicon line " + std::to_string(lineno) + ": expected language<TAB>word<TAB>symbols");
    }
    std::istringstream syms(line.substr(t2 + 1));
    std::vector<std::string> symbols;
    for (std::string s; syms >> s;) symbols.push_back(s);
    try {
      lex.add(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), std::move(symbols));
    } catch (const InvalidInput& e) {
      throw InvalidInput("lexicon line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lex;
}

PhonemeLexicon PhonemeLexicon::load(const std::string& path) { return parse(read_text_file(path)); }

std::string PhonemeLexicon::format() const {
  std::string out;
  for (const auto& [lang, words] : entries_) {
    for (const auto& [word, symbols] : words) {
      out += lang + "\t" + word + "\t";
      for (std::size_t i = 0; i < symbols.size(); ++i) out += (i ? " " : "") + symbols[i];
      out += "\n";
    }
  }
  return out;
}

// --- vocabulary --------------------------------------------------------

Vocabulary::Vocabulary(TextMode mode, std::vector<std::string> symbols) : mode_(mode), symbols_(std::move(symbols)) {
  std::sort(symbols_.begin(), symbols_.end());
  if (std::adjacent_find(symbols_.begin(), symbols_.end()) != symbols_.end()) {
    throw InvalidInput("vocabulary symbols must be unique");
  }
}

std::optional<int> Vocabulary::id(const std::string& symbol) const {
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
  if (it == symbols_.end() || *it != symbol) return std::nullopt;
  return static_cast<int>(it - symbols_.begin()) + 2;
}

const std::string& Vocabulary::symbol(int id) const {
  if (id < 2 || id >= size()) throw InvalidInput("token id " + std::to_string(id) + " has no symbol");
  return symbols_[static_cast<std::size_t>(id - 2)];
}

nlohmann::json Vocabulary::to_json() const { return {{"mode", to_string(mode_)}, {"symbols", symbols_}}; }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  return Vocabulary(parse_text_mode(j.at("mode").get<std::string>()), j.at("symbols").get<std::vector<std::string>>());
}

// --- encoding ----------------------------------------------------------

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string> split_words(const std::string& normalized) {
  std::vector<std::string> words;
  std::istringstream in(normalized);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

}  // namespace

std::string normalize_text(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<Utterance>& utterances, TextMode mode, const PhonemeLexicon* lexicon,
                            UnkPolicy policy) {
  std::set<std::string> symbols;
  if (mode == TextMode::kCharacter) {
    for (const auto& u : utterances) {
      for (auto& cp : split_codepoints(normalize_text(u.text))) symbols.insert(std::move(cp));
    }
  } else {
    if (lexicon == nullptr) throw InvalidInput("phoneme vocabulary needs a lexicon");
    symbols.insert(kWordBoundary);
    for (const auto& u : utterances) {
      for (const auto& word : split_words(normalize_text(u.text))) {
        const auto* entry = lexicon->find(u.language, word);
        if (entry == nullptr) {
          if (policy == UnkPolicy::kStrict) {
            throw InvalidInput("word '" + word + "' (" + u.language + ", utterance " + u.id + ") is not in the lexicon");
          }
          continue;
        }
        symbols.insert(entry->begin(), entry->end());
      }
    }
  }
  return Vocabulary(mode, std::vector<std::string>(symbols.begin(), symbols.end()));
}

TokenSequence encode(const std::string& text, const std::string& language, const Vocabulary& vocab,
                     const PhonemeLexicon* lexicon, UnkPolicy policy) {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw InvalidInput("cannot encode empty text");
  TokenSequence out;
  out.language = language;
  auto push = [&](const std::string& sym) {
    if (auto id = vocab.id(sym)) {
      out.ids.push_back(*id);
    } else if (policy == UnkPolicy::kLenient) {
      out.ids.push_back(kUnkId);
    } else {
      throw InvalidInput("symbol '" + sym + "' is not in the vocabulary");
    }
  };
  if (vocab.mode() == TextMode::kCharacter) {
    for (const auto& cp : split_codepoints(norm)) push(cp);
    return out;
  }
  if (lexicon == nullptr) throw InvalidInput("phoneme encoding needs a lexicon");
  const auto words = split_words(norm);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) push(kWordBoundary);
    const auto* entry = lexicon->find(language, words[w]);
    if (entry == nullptr) {
      if (policy == UnkPolicy::kStrict) {
        throw InvalidInput("word '" + words[w] + "' (" + language + ") is not in the lexicon");
      }
      out.ids.push_back(kUnkId);
      continue;
    }
    for (const auto& sym : *entry) push(sym);
  }
  return out;
}

std::string decode(const TokenSequence& tokens, const Vocabulary& vocab) {
  if (vocab.mode() != TextMode::kCharacter) throw InvalidInput("decode is only defined for character vocabularies");
  if (tokens.ids.empty()) throw InvalidInput("cannot decode an empty token sequence");
  std::string out;
  for (int id : tokens.ids) {
    if (id < 0 || id >= vocab.size()) throw InvalidInput("token id " + std::to_string(id) + " out of range");
    if (id == kPadId) throw InvalidInput("cannot decode PAD");
    out += id == kUnkId ? "\xEF\xBF\xBD" : vocab.symbol(id);
  }
  return out;
}

}  // namespace unitts
