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

#include "unitts/corpus.hpp"
#include "unitts/features.hpp"
#include "unitts/t2u.hpp"
#include "unitts/units.hpp"
#include "unitts/vocoder.hpp"

namespace unitts {

// Fraction of equal positions; lengths must match.
double unit_accuracy(const UnitSequence& pred, const UnitSequence& ref);

// Compares the common prefix; lengths may differ.
double unit_accuracy_truncated(const UnitSequence& pred, const UnitSequence& ref);

// Mean absolute per-token difference over all sequences.
double duration_mae(const std::vector<DurationSequence>& pred, const std::vector<DurationSequence>& ref);

/// Maximum-weight perfect matching on a square matrix (Hungarian method).
/// Returns assignment[row] = column.
std::vector<int> max_weight_assignment(const Matrix& weights);

struct PermutedAgreement {
  double rate = 0.0;
  // permutation[predicted id] = reference id
  std::vector<int> permutation;
};

PermutedAgreement permuted_agreement(const std::vector<UnitSequence>& pred, const std::vector<UnitSequence>& ref,
                                     int k);

struct LabeledWaveform {
  Waveform audio;
  std::string speaker;
};

/// Nearest-centroid speaker classifier over the utterance mean of
/// un-normalized features.
class SpeakerProbe {
 public:
  SpeakerProbe(const std::vector<LabeledWaveform>& train, FeatureConfig cfg);

  std::string classify(const Waveform& w) const;
  double accuracy(const std::vector<LabeledWaveform>& test) const;
  const std::vector<std::string>& speakers() const { return speakers_; }

 private:
  Eigen::RowVectorXd embed(const Waveform& w) const;

  FeatureConfig cfg_;
  std::vector<std::string> speakers_;
  Matrix centroids_;
};

double speaker_probe(const std::vector<LabeledWaveform>& train, const std::vector<LabeledWaveform>& test,
                     const FeatureConfig& cfg);

// Re-encodes synthesized audio and compares it with the units it came from.
double round_trip_recovery(const Waveform& synthesized, const UnitSequence& source, const Codebook& cb,
                           const FeatureConfig& cfg);

struct EvalMetrics {
  std::optional<double> unit_accuracy;
  std::optional<double> duration_mae;
  // Aligner durations against generator ground truth.
  std::optional<double> aligner_mae;
  std::optional<double> codebook_agreement;
  std::optional<double> speaker_probe;
  std::optional<double> round_trip;
};

struct EvalReport {
  std::map<std::string, EvalMetrics> languages;
  EvalMetrics overall;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct CrossLingualSpeaker {
  std::string speaker;
  double probe_accuracy = 0.0;
  double recovery = 0.0;
};

struct CrossLingualReport {
  std::string language;
  std::size_t utterances = 0;
  bool units_identical = false;
  std::vector<CrossLingualSpeaker> speakers;

  nlohmann::json to_json() const;
};

struct ModelSet {
  const T2UModel* t2u = nullptr;
  const VocoderModel* vocoder = nullptr;
  const Codebook* codebook = nullptr;
  const SpeakerTable* speakers = nullptr;
  FeatureConfig features;
  int sample_rate = 16000;
};

/// Synthesizes every token sequence with every requested speaker. The
/// text-to-unit output is recomputed per speaker and compared byte for byte;
/// any difference throws.
CrossLingualReport cross_lingual_report(const ModelSet& models, const std::vector<TokenSequence>& texts,
                                        const std::vector<std::string>& speakers, const SpeakerProbe& probe);

}  // namespace unitts
