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

#include <string>
#include <vector>

#include <json.hpp>

#include "unitts/common.hpp"
#include "unitts/corpus.hpp"

namespace unitts {

struct FeatureConfig {
  int sample_rate = 16000;
  int hop = 320;
  int window = 640;
  int n_bands = 40;
  bool normalize = true;

  void validate() const;
  // FFT size: smallest power of two >= max(window, 512). Zero padding keeps
  // every mel band populated for short windows.
  int fft_size() const;
  // Stable hash of every field that changes the feature values.
  std::string fingerprint() const;

  bool operator==(const FeatureConfig&) const = default;
};

void to_json(nlohmann::json& j, const FeatureConfig& c);
void from_json(const nlohmann::json& j, FeatureConfig& c);

struct FeatureSequence {
  Matrix frames;  // num_frames x n_bands
  FeatureConfig config;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

constexpr double kLogFloor = 1e-8;
constexpr double kVarianceFloor = 1e-6;

/// floor((num_samples - window) / hop) + 1, or 0 when shorter than a window.
int frame_count(std::size_t num_samples, const FeatureConfig& cfg);

/// Log mel-band energies of Hann-weighted frames; frame t covers samples
/// [t*hop, t*hop + window). Applies normalize_features when cfg.normalize.
FeatureSequence extract_features(const Waveform& w, const FeatureConfig& cfg);

/// Per-dimension zero mean, unit variance over the utterance.
FeatureSequence normalize_features(const FeatureSequence& f);

// Feature dump: "FEAT", version u8, frames u32, bands u32, row-major f32 LE.
void write_feature_dump(const FeatureSequence& f, std::ostream& os);
Matrix read_feature_dump(std::istream& is);

}  // namespace unitts
