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

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unitts/common.hpp"

namespace unitts {

/// One paired (text, audio) record of a manifest.
struct Utterance {
  std::string id;
  std::string audio_path;
  std::string text;
  std::string language;
  std::string speaker;

  bool operator==(const Utterance&) const = default;
};

struct Waveform {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  void validate() const;
};

/// Reads a JSON-lines manifest (keys id, audio, text, language, speaker).
/// Errors name the offending 1-based line number.
std::vector<Utterance> load_manifest(const std::string& path);
std::vector<Utterance> parse_manifest(const std::string& text);
void save_manifest(const std::vector<Utterance>& utterances, const std::string& path);
std::string format_manifest(const std::vector<Utterance>& utterances);

/// Speaker id <-> one-hot index. Ids are kept sorted, so indices are
/// reproducible across runs and machines.
class SpeakerTable {
 public:
  SpeakerTable() = default;
  explicit SpeakerTable(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t index(const std::string& id) const;
  bool contains(const std::string& id) const;
  const std::string& id(std::size_t index) const { return ids_.at(index); }

  nlohmann::json to_json() const;
  static SpeakerTable from_json(const nlohmann::json& j);

  bool operator==(const SpeakerTable&) const = default;

 private:
  std::vector<std::string> ids_;
};

SpeakerTable build_speaker_table(const std::vector<Utterance>& utterances);

void write_wav(const Waveform& w, const std::string& path);
Waveform read_wav(const std::string& path);
std::string encode_wav(const Waveform& w);
Waveform decode_wav(const std::string& bytes);

// --- synthetic corpus --------------------------------------------------

struct PhonePrototype {
  std::vector<double> frequencies;  // Hz
  std::vector<double> amplitudes;
};

struct ProgramStep {
  int phone = 0;
  int frames = 1;
  bool operator==(const ProgramStep&) const = default;
};

/// A synthetic language: every grapheme (one UTF-8 codepoint) expands to a
/// fixed program of (pseudo-phone, frame count) steps. The grapheme " "
/// is the word separator; if absent, texts are single words.
struct SyntheticLanguageSpec {
  std::string name;
  std::map<std::string, std::vector<ProgramStep>> grapheme_programs;
  std::map<int, PhonePrototype> prototypes;

  void validate(int sample_rate) const;
};

struct SyntheticSpeakerSpec {
  std::string id;
  double f0_scale = 1.0;       // multiplies every prototype frequency
  double spectral_tilt = 0.0;  // dB per octave relative to 1 kHz
  double gain = 1.0;
  // Languages this speaker records. Empty means all languages.
  std::vector<std::string> languages;

  bool speaks(const std::string& language) const;
  void validate(int sample_rate) const;
};

struct SyntheticCorpusOptions {
  int sample_rate = 16000;
  int hop = 64;
  int texts_per_pair = 8;
  // Texts read by every speaker of a language; the rest of each speaker's
  // texts are their own. Negative means all texts are shared.
  int shared_texts = -1;
  int min_words = 2;
  int max_words = 4;
  int min_word_length = 2;
  int max_word_length = 5;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<Utterance> utterances;
  std::vector<Waveform> waveforms;
  std::vector<std::vector<int>> unit_frames;  // ground-truth pseudo-phone per frame
  std::vector<std::vector<int>> durations;    // frames per grapheme (codepoint) of text
  // Pseudo-phone programs per utterance, flattened: one entry per step.
  std::vector<std::vector<ProgramStep>> steps;
};

SyntheticCorpus generate_synthetic_corpus(const std::vector<SyntheticLanguageSpec>& languages,
                                          const std::vector<SyntheticSpeakerSpec>& speakers,
                                          const SyntheticCorpusOptions& options);

/// Renders a step sequence for one speaker. Each frame is hop samples.
Waveform render_steps(const std::vector<ProgramStep>& steps, const SyntheticLanguageSpec& language,
                      const SyntheticSpeakerSpec& speaker, int sample_rate, int hop);

/// Expands text through the grapheme programs.
std::vector<ProgramStep> text_to_steps(const std::string& text, const SyntheticLanguageSpec& language);

// Default desk-scale setup: 16 pseudo-phones (phone 0 is a low-level pause
// comb used for word boundaries), three languages over the shared phone set
// and four speakers with distinct gain/tilt/pitch. Speaker "spk3" records
// only L2, so (L1 text, spk3 voice) never occurs in the corpus.
std::map<int, PhonePrototype> default_phone_prototypes();
std::vector<SyntheticLanguageSpec> default_synthetic_languages();
std::vector<SyntheticSpeakerSpec> default_synthetic_speakers();

void to_json(nlohmann::json& j, const ProgramStep& s);
void from_json(const nlohmann::json& j, ProgramStep& s);
void to_json(nlohmann::json& j, const PhonePrototype& p);
void from_json(const nlohmann::json& j, PhonePrototype& p);
void to_json(nlohmann::json& j, const SyntheticLanguageSpec& s);
void from_json(const nlohmann::json& j, SyntheticLanguageSpec& s);
void to_json(nlohmann::json& j, const SyntheticSpeakerSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpeakerSpec& s);

}  // namespace unitts
