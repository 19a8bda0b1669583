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
#include <string>
#include <vector>

#include <json.hpp>

#include "unitts/corpus.hpp"
#include "unitts/nn/autograd.hpp"
#include "unitts/units.hpp"

namespace unitts {

struct VocoderConfig {
  int num_units = 16;  // K
  int num_speakers = 1;
  int embed_dim = 32;
  std::vector<int> upsample = {4, 4, 4};
  int channels = 128;  // halved after every stage
  std::vector<int> dilations = {1, 3, 9};
  int resblock_kernel = 3;
  int io_kernel = 7;  // conv_pre / conv_post
  std::vector<int> fft_sizes = {128, 256, 512};
  double l1_weight = 0.1;

  int hop() const;
  void validate() const;
  bool operator==(const VocoderConfig&) const = default;
};

void to_json(nlohmann::json& j, const VocoderConfig& c);
void from_json(const nlohmann::json& j, VocoderConfig& c);

/// One STFT resolution: Hann window of `fft_size`, hop fft_size / 4.
struct SpectralLossValue {
  double convergence = 0.0;
  double log_magnitude = 0.0;
};

/// Multi-resolution spectral loss between a predicted waveform (L x 1) and
/// a target of the same length: mean over resolutions of spectral
/// convergence plus mean absolute log-magnitude difference.
nn::Var spectral_loss(const nn::Var& predicted, const Eigen::VectorXd& target, const std::vector<int>& fft_sizes,
                      std::vector<SpectralLossValue>* parts = nullptr);

class VocoderModel {
 public:
  VocoderModel() = default;
  VocoderModel(const VocoderConfig& config, std::uint64_t seed);

  const VocoderConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // Waveform as a (len(units) * hop) x 1 column.
  nn::Var forward(const std::vector<int>& units, int speaker) const;

  void save(const std::string& path) const;
  static VocoderModel load(const std::string& path);
  std::string serialize() const;

 private:
  struct ResUnit {
    std::size_t w1, b1, w2, b2;
  };
  struct Stage {
    std::size_t up_w, up_b;
    std::vector<ResUnit> res;
  };
  void build(std::uint64_t seed);

  VocoderConfig config_;
  nn::ParamStore params_;
  std::size_t embedding_ = 0, pre_w_ = 0, pre_b_ = 0, post_w_ = 0, post_b_ = 0;
  std::vector<Stage> stages_;
};

Waveform synthesize(const VocoderModel& m, const UnitSequence& units, int speaker, int sample_rate);

struct VocoderExample {
  UnitSequence units;  // from ground-truth audio
  int speaker = 0;
  Waveform audio;
};

struct VocoderTrainOptions {
  int epochs = 100;
  int batch_size = 8;
  double lr = 2e-4;
  double clip_norm = 1.0;
  // Random crop length in frames per example and step; 0 trains on whole
  // utterances.
  int segment_frames = 0;
  std::uint64_t seed = 0;
};

struct VocoderEpochLoss {
  double total = 0.0;
  double spectral = 0.0;
  double l1 = 0.0;
};

struct VocoderTrainingState {
  std::uint64_t steps = 0;
  std::vector<VocoderEpochLoss> history;
};

/// Truncates each waveform to len(units) * hop; a waveform shorter than
/// that is an error.
std::vector<VocoderExample> prepare_vocoder_examples(std::vector<VocoderExample> examples, int hop);

VocoderTrainingState train_vocoder(VocoderModel& m, const std::vector<VocoderExample>& data,
                                   const VocoderTrainOptions& opts);

}  // namespace unitts
