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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "unitts/aligner.hpp"
#include "unitts/nn/autograd.hpp"
#include "unitts/text_frontend.hpp"
#include "unitts/units.hpp"

namespace unitts {

struct T2UConfig {
  int vocab_size = 0;
  int num_units = 16;  // K
  int embed_dim = 64;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int heads = 2;
  int ffn_dim = 0;  // 0 means 4 * embed_dim
  int kernel = 3;
  double dropout = 0.1;
  // Upper clamp on a predicted token duration at inference.
  int max_duration = 1000;

  int ffn_width() const { return ffn_dim > 0 ? ffn_dim : 4 * embed_dim; }
  void validate() const;
  bool operator==(const T2UConfig&) const = default;
};

void to_json(nlohmann::json& j, const T2UConfig& c);
void from_json(const nlohmann::json& j, T2UConfig& c);

/// Row i of `token_states` repeated durations[i] times, in order.
Matrix length_regulate(const Matrix& token_states, const DurationSequence& d);

// Sinusoidal position table, rows x dim.
Matrix positional_encoding(int rows, int dim);

struct T2UExample {
  TokenSequence tokens;
  DurationSequence durations;
  UnitSequence units;
};

struct T2UForward {
  nn::Var logits;        // frames x K
  nn::Var log_durations;  // N x 1
};

struct T2ULoss {
  nn::Var total;
  double ce = 0.0;
  double duration = 0.0;
};

class T2UModel {
 public:
  T2UModel() = default;
  T2UModel(const T2UConfig& config, std::uint64_t seed);

  const T2UConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // Runs the network. The decoder length follows `durations`; `rng` enables
  // dropout when non-null.
  T2UForward forward(std::span<const int> tokens, std::span<const int> durations, Rng* rng) const;
  // Encoder plus duration predictor only.
  nn::Var predict_log_durations(std::span<const int> tokens) const;

  void save(const std::string& path) const;
  static T2UModel load(const std::string& path);
  std::string serialize() const;

 private:
  struct Block {
    std::size_t qkv_w, qkv_b, out_w, out_b, ln1_g, ln1_b;
    std::size_t conv1_w, conv1_b, conv2_w, conv2_b, ln2_g, ln2_b;
  };
  void build(std::uint64_t seed);
  Block add_block(const std::string& prefix, Rng& rng);
  nn::Var run_block(const Block& b, nn::Var x, Rng* rng) const;
  nn::Var encode(std::span<const int> tokens, Rng* rng) const;
  nn::Var duration_head(const nn::Var& enc, Rng* rng) const;

  T2UConfig config_;
  nn::ParamStore params_;
  std::size_t embedding_ = 0;
  std::vector<Block> encoder_, decoder_;
  std::size_t dp_conv1_w_ = 0, dp_conv1_b_ = 0, dp_ln1_g_ = 0, dp_ln1_b_ = 0;
  std::size_t dp_conv2_w_ = 0, dp_conv2_b_ = 0, dp_ln2_g_ = 0, dp_ln2_b_ = 0;
  std::size_t dp_proj_w_ = 0, dp_proj_b_ = 0;
  std::size_t out_w_ = 0, out_b_ = 0;
};

/// CE over frames plus lambda_dur * MSE on log durations, with the decoder
/// length fixed by the reference durations.
T2ULoss forward_train(const T2UModel& m, const T2UExample& ex, double lambda_dur = 0.1, Rng* rng = nullptr);

struct T2UTrainOptions {
  int epochs = 50;
  int batch_size = 16;
  double lr = 1e-3;
  double lambda_dur = 0.1;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
};

struct EpochLoss {
  double total = 0.0;
  double ce = 0.0;
  double duration = 0.0;
};

struct TrainingState {
  std::uint64_t steps = 0;
  std::vector<EpochLoss> history;
};

TrainingState train(T2UModel& m, const std::vector<T2UExample>& data, const T2UTrainOptions& opts);

struct T2UPrediction {
  UnitSequence units;
  DurationSequence durations;
};

T2UPrediction predict_units(const T2UModel& m, const TokenSequence& tokens);

}  // namespace unitts
