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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unitts/corpus.hpp"
#include "unitts/evalsuite.hpp"
#include "unitts/features.hpp"
#include "unitts/t2u.hpp"
#include "unitts/text_frontend.hpp"
#include "unitts/units.hpp"
#include "unitts/vocoder.hpp"

namespace unitts::pipeline {

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string workdir = "work";
  std::string manifest;  // empty: synthetic corpus produced by gen-corpus
  std::string lexicon;
  TextMode text_mode = TextMode::kCharacter;
  UnkPolicy unk_policy = UnkPolicy::kStrict;

  SyntheticCorpusOptions synthetic;
  std::vector<SyntheticLanguageSpec> languages;
  std::vector<SyntheticSpeakerSpec> speakers;

  FeatureConfig features;
  int k = 16;
  KMeansOptions kmeans;

  T2UConfig t2u;
  T2UTrainOptions t2u_train;
  int heldout_texts_per_language = 0;

  VocoderConfig vocoder;
  VocoderTrainOptions vocoder_train;

  // Paths in the document are resolved against this directory.
  std::filesystem::path base_dir = ".";
};

PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::string& path);
nlohmann::json config_to_json(const PipelineConfig& c);

enum class Outcome { kRan, kUpToDate };

struct RunOptions {
  bool force = false;
  std::ostream* log = nullptr;
};

// Per-language split used to train the text-to-unit model.
struct T2USplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> heldout_ids;
};

struct SynthesisResult {
  TokenSequence tokens;
  UnitSequence units;
  DurationSequence durations;
  Waveform audio;
};

struct CrossLingualResult {
  CrossLingualReport report;
  // Whether any training utterance pairs the text language with a speaker.
  std::vector<bool> pairing_seen;
  // Round-trip recovery of the same speakers on a language they speak.
  std::vector<double> same_language_recovery;
  std::vector<std::string> same_language;

  nlohmann::json to_json() const;
};

class Workspace {
 public:
  explicit Workspace(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& dir() const { return dir_; }

  Outcome gen_corpus(const RunOptions& opts);
  Outcome build_vocab(const RunOptions& opts);
  Outcome train_codebook(const RunOptions& opts);
  Outcome encode_units(const RunOptions& opts);
  Outcome align(const RunOptions& opts);
  Outcome train_t2u(const RunOptions& opts, std::optional<int> max_paired_frames_per_language = std::nullopt);
  Outcome train_vocoder(const RunOptions& opts);
  SynthesisResult synthesize(const std::string& text, const std::string& language, const std::string& speaker,
                             const std::string& out_path);
  EvalReport evaluate(const RunOptions& opts);
  CrossLingualResult cross_lingual(const std::string& text_language, const std::vector<std::string>& speakers,
                                   const std::vector<std::string>& texts, const RunOptions& opts);

  // Artifact paths.
  std::filesystem::path manifest_path() const;
  std::filesystem::path corpus_dir() const;
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  // Loaded artifacts (each checks that its producer ran and is current).
  std::vector<Utterance> utterances() const;
  Waveform audio(const Utterance& u) const;
  Vocabulary vocabulary() const;
  Codebook codebook() const;
  SpeakerTable speaker_table() const;
  T2UModel t2u_model() const;
  VocoderModel vocoder_model() const;
  T2USplit t2u_split() const;
  std::optional<PhonemeLexicon> lexicon() const;

 private:
  nlohmann::json stage_config(const std::string& command) const;
  std::vector<std::string> dependencies(const std::string& command) const;
  // Throws ArtifactError naming the command to run when a dependency is
  // missing, stale or was modified.
  nlohmann::json check_inputs(const std::string& command) const;
  bool up_to_date(const std::string& command, const nlohmann::json& inputs, const nlohmann::json& extra) const;
  void write_stamp(const std::string& command, const nlohmann::json& inputs, const nlohmann::json& extra,
                   const std::vector<std::string>& outputs) const;
  void require(const std::string& command) const;
  void log(const RunOptions& opts, const std::string& msg) const;

  PipelineConfig config_;
  std::filesystem::path dir_;
};

// Pipeline order of commands; used for "run X first" diagnostics.
const std::vector<std::string>& command_order();

/// Builds text-to-unit training pairs: one utterance per distinct
/// (language, text), the last `heldout` texts of every language held out,
/// and an optional per-language frame budget on the training side.
T2USplit split_paired_data(const std::vector<Utterance>& utterances, const std::map<std::string, int>& frames,
                           int heldout_per_language, std::optional<int> max_frames_per_language);

std::string hash_file(const std::filesystem::path& p);

}  // namespace unitts::pipeline
