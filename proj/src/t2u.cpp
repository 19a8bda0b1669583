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

#include "unitts/t2u.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unitts/nn/checkpoint.hpp"
#include "unitts/nn/optim.hpp"

namespace unitts {

using nn::Var;

void T2UConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw InvalidInput(std::string("t2u config: ") + name + " must be >= 1");
  };
  positive(vocab_size, "vocab_size");
  positive(embed_dim, "embed_dim");
  positive(encoder_layers, "encoder_layers");
  positive(decoder_layers, "decoder_layers");
  positive(heads, "heads");
  positive(kernel, "kernel");
  positive(max_duration, "max_duration");
  if (num_units < 2) throw InvalidInput("t2u config: num_units must be >= 2");
  if (embed_dim % heads != 0) throw InvalidInput("t2u config: embed_dim must be divisible by heads");
  if (kernel % 2 == 0) throw InvalidInput("t2u config: kernel must be odd");
  if (ffn_dim < 0) throw InvalidInput("t2u config: ffn_dim must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("t2u config: dropout must be in [0, 1)");
}

void to_json(nlohmann::json& j, const T2UConfig& c) {
  j = {{"vocab_size", c.vocab_size},         {"num_units", c.num_units},
       {"embed_dim", c.embed_dim},           {"encoder_layers", c.encoder_layers},
       {"decoder_layers", c.decoder_layers}, {"heads", c.heads},
       {"ffn_dim", c.ffn_dim},               {"kernel", c.kernel},
       {"dropout", c.dropout},               {"max_duration", c.max_duration}};
}

void from_json(const nlohmann::json& j, T2UConfig& c) {
  T2UConfig d;
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.num_units = j.value("num_units", d.num_units);
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.encoder_layers = j.value("encoder_layers", d.encoder_layers);
  c.decoder_layers = j.value("decoder_layers", d.decoder_layers);
  c.heads = j.value("heads", d.heads);
  c.ffn_dim = j.value("ffn_dim", d.ffn_dim);
  c.kernel = j.value("kernel", d.kernel);
  c.dropout = j.value("dropout", d.dropout);
  c.max_duration = j.value("max_duration", d.max_duration);
}

Matrix length_regulate(const Matrix& token_states, const DurationSequence& d) {
  if (static_cast<Eigen::Index>(d.size()) != token_states.rows()) {
    throw InvalidInput("length_regulate: " + std::to_string(d.size()) + " durations for " +
                       std::to_string(token_states.rows()) + " tokens");
  }
  return nn::repeat_rows(nn::constant(token_states), d.frames).value();
}

Matrix positional_encoding(int rows, int dim) {
  Matrix pe(rows, dim);
  for (int p = 0; p < rows; ++p) {
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / dim);
      pe(p, i) = i % 2 == 0 ? std::sin(p * rate) : std::cos(p * rate);
    }
  }
  return pe;
}

namespace {

Var linear(const Var& x, const Var& w, const Var& b) { return nn::add_row(nn::matmul(x, w), b); }

Matrix ones_row(int n) { return Matrix::Ones(1, n); }
Matrix zeros_row(int n) { return Matrix::Zero(1, n); }

}  // namespace

T2UModel::T2UModel(const T2UConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  build(seed);
  params_.snap_to_f32();
}

T2UModel::Block T2UModel::add_block(const std::string& prefix, Rng& rng) {
  const int d = config_.embed_dim, f = config_.ffn_width(), k = config_.kernel;
  Block b{};
  b.qkv_w = params_.add(prefix + ".attn.qkv.w", nn::xavier_init(d, 3 * d, d, d, rng));
  b.qkv_b = params_.add(prefix + ".attn.qkv.b", zeros_row(3 * d));
  b.out_w = params_.add(prefix + ".attn.out.w", nn::xavier_init(d, d, d, d, rng));
  b.out_b = params_.add(prefix + ".attn.out.b", zeros_row(d));
  b.ln1_g = params_.add(prefix + ".ln1.g", ones_row(d));
  b.ln1_b = params_.add(prefix + ".ln1.b", zeros_row(d));
  b.conv1_w = params_.add(prefix + ".conv1.w", nn::xavier_init(k * d, f, k * d, f, rng));
  b.conv1_b = params_.add(prefix + ".conv1.b", zeros_row(f));
  b.conv2_w = params_.add(prefix + ".conv2.w", nn::xavier_init(f, d, f, d, rng));
  b.conv2_b = params_.add(prefix + ".conv2.b", zeros_row(d));
  b.ln2_g = params_.add(prefix + ".ln2.g", ones_row(d));
  b.ln2_b = params_.add(prefix + ".ln2.b", zeros_row(d));
  return b;
}

void T2UModel::build(std::uint64_t seed) {
  Rng rng(mix_seed(seed, "t2u/init"));
  const int d = config_.embed_dim, k = config_.kernel;
  embedding_ = params_.add("embedding", nn::normal_init(config_.vocab_size, d, 1.0, rng));
  for (int l = 0; l < config_.encoder_layers; ++l) encoder_.push_back(add_block("encoder." + std::to_string(l), rng));
  dp_conv1_w_ = params_.add("duration.conv1.w", nn::xavier_init(k * d, d, k * d, d, rng));
  dp_conv1_b_ = params_.add("duration.conv1.b", zeros_row(d));
  dp_ln1_g_ = params_.add("duration.ln1.g", ones_row(d));
  dp_ln1_b_ = params_.add("duration.ln1.b", zeros_row(d));
  dp_conv2_w_ = params_.add("duration.conv2.w", nn::xavier_init(k * d, d, k * d, d, rng));
  dp_conv2_b_ = params_.add("duration.conv2.b", zeros_row(d));
  dp_ln2_g_ = params_.add("duration.ln2.g", ones_row(d));
  dp_ln2_b_ = params_.add("duration.ln2.b", zeros_row(d));
  dp_proj_w_ = params_.add("duration.proj.w", nn::xavier_init(d, 1, d, 1, rng));
  dp_proj_b_ = params_.add("duration.proj.b", Matrix::Zero(1, 1));
  for (int l = 0; l < config_.decoder_layers; ++l) decoder_.push_back(add_block("decoder." + std::to_string(l), rng));
  out_w_ = params_.add("out.w", nn::xavier_init(d, config_.num_units, d, config_.num_units, rng));
  out_b_ = params_.add("out.b", zeros_row(config_.num_units));
}

Var T2UModel::run_block(const Block& b, Var x, Rng* rng) const {
  const int d = config_.embed_dim, heads = config_.heads, dh = d / heads;
  const auto& p = params_;
  Var qkv = linear(x, p[b.qkv_w], p[b.qkv_b]);
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Var q = nn::slice_cols(qkv, h * dh, dh);
    Var k = nn::slice_cols(qkv, d + h * dh, dh);
    Var v = nn::slice_cols(qkv, 2 * d + h * dh, dh);
    Var att = nn::softmax_rows(nn::scale(nn::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dh))));
    outs.push_back(nn::matmul(att, v));
  }
  Var attn = linear(heads == 1 ? outs.front() : nn::concat_cols(outs), p[b.out_w], p[b.out_b]);
  x = nn::layer_norm(nn::add(x, nn::dropout(attn, config_.dropout, rng)), p[b.ln1_g], p[b.ln1_b]);
  Var ff = nn::relu(nn::conv1d(x, p[b.conv1_w], p[b.conv1_b], config_.kernel));
  ff = nn::conv1d(nn::dropout(ff, config_.dropout, rng), p[b.conv2_w], p[b.conv2_b], 1);
  return nn::layer_norm(nn::add(x, nn::dropout(ff, config_.dropout, rng)), p[b.ln2_g], p[b.ln2_b]);
}

Var T2UModel::encode(std::span<const int> tokens, Rng* rng) const {
  if (tokens.empty()) throw InvalidInput("t2u: empty token sequence");
  for (int id : tokens) {
    if (id < 0 || id >= config_.vocab_size) {
      throw InvalidInput("t2u: token id " + std::to_string(id) + " outside vocabulary of " +
                         std::to_string(config_.vocab_size));
    }
  }
  const int n = static_cast<int>(tokens.size());
  Var x = nn::add(nn::gather_rows(params_[embedding_], tokens), nn::constant(positional_encoding(n, config_.embed_dim)));
  x = nn::dropout(x, config_.dropout, rng);
  for (const auto& b : encoder_) x = run_block(b, x, rng);
  return x;
}

Var T2UModel::duration_head(const Var& enc, Rng* rng) const {
  const auto& p = params_;
  Var h = nn::relu(nn::conv1d(enc, p[dp_conv1_w_], p[dp_conv1_b_], config_.kernel));
  h = nn::dropout(nn::layer_norm(h, p[dp_ln1_g_], p[dp_ln1_b_]), config_.dropout, rng);
  h = nn::relu(nn::conv1d(h, p[dp_conv2_w_], p[dp_conv2_b_], config_.kernel));
  h = nn::dropout(nn::layer_norm(h, p[dp_ln2_g_], p[dp_ln2_b_]), config_.dropout, rng);
  return linear(h, p[dp_proj_w_], p[dp_proj_b_]);
}

T2UForward T2UModel::forward(std::span<const int> tokens, std::span<const int> durations, Rng* rng) const {
  if (durations.size() != tokens.size()) {
    throw InvalidInput("t2u: " + std::to_string(durations.size()) + " durations for " +
                       std::to_string(tokens.size()) + " tokens");
  }
  Var enc = encode(tokens, rng);
  T2UForward out;
  out.log_durations = duration_head(enc, rng);
  Var x = nn::repeat_rows(enc, durations);
  x = nn::add(x, nn::constant(positional_encoding(static_cast<int>(x.rows()), config_.embed_dim)));
  for (const auto& b : decoder_) x = run_block(b, x, rng);
  out.logits = linear(x, params_[out_w_], params_[out_b_]);
  return out;
}

Var T2UModel::predict_log_durations(std::span<const int> tokens) const {
  return duration_head(encode(tokens, nullptr), nullptr);
}

std::string T2UModel::serialize() const {
  nn::Checkpoint ck{"t2u", nlohmann::json(config_).dump(), params_};
  return nn::encode_checkpoint(ck);
}

void T2UModel::save(const std::string& path) const {
  nn::save_checkpoint(path, nn::Checkpoint{"t2u", nlohmann::json(config_).dump(), params_});
}

T2UModel T2UModel::load(const std::string& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != "t2u") throw ArtifactError(path + ": checkpoint kind '" + ck.kind + "' is not t2u");
  T2UConfig cfg;
  try {
    cfg = nlohmann::json::parse(ck.config_json).get<T2UConfig>();
    cfg.validate();
  } catch (const std::exception& e) {
    throw ArtifactError(path + ": bad t2u config: " + e.what());
  }
  T2UModel m(cfg, 0);
  nn::assign_params(m.params_, ck.params);
  return m;
}

T2ULoss forward_train(const T2UModel& m, const T2UExample& ex, double lambda_dur, Rng* rng) {
  ex.durations.validate();
  if (static_cast<std::size_t>(ex.durations.total()) != ex.units.size()) {
    throw InvalidInput("forward_train: durations sum to " + std::to_string(ex.durations.total()) + " but there are " +
                       std::to_string(ex.units.size()) + " unit frames");
  }
  for (int u : ex.units.ids) {
    if (u < 0 || u >= m.config().num_units) throw InvalidInput("forward_train: unit id out of range");
  }
  T2UForward f = m.forward(ex.tokens.ids, ex.durations.frames, rng);
  Matrix target(static_cast<Eigen::Index>(ex.durations.size()), 1);
  for (std::size_t i = 0; i < ex.durations.size(); ++i) {
    target(static_cast<Eigen::Index>(i), 0) = std::log(static_cast<double>(ex.durations.frames[i]));
  }
  Var ce = nn::cross_entropy(f.logits, ex.units.ids);
  Var dur = nn::mse(f.log_durations, target);
  T2ULoss loss;
  loss.ce = ce.item();
  loss.duration = dur.item();
  loss.total = nn::add(ce, nn::scale(dur, lambda_dur));
  return loss;
}

TrainingState train(T2UModel& m, const std::vector<T2UExample>& data, const T2UTrainOptions& opts) {
  if (opts.epochs < 0) throw InvalidInput("train: epochs must be >= 0");
  if (opts.batch_size < 1) throw InvalidInput("train: batch_size must be >= 1");
  TrainingState state;
  if (opts.epochs == 0) return state;
  if (data.empty()) throw InvalidInput("train: no training examples");
  for (const auto& ex : data) {
    ex.durations.validate();
    if (static_cast<std::size_t>(ex.durations.total()) != ex.units.size() || ex.durations.size() != ex.tokens.size()) {
      throw InvalidInput("train: example with inconsistent tokens/durations/units");
    }
  }
  nn::Adam adam(m.params(), nn::AdamOptions{opts.lr, 0.9, 0.999, 1e-8, opts.clip_norm});
  Rng shuffle_rng(mix_seed(opts.seed, "t2u/shuffle"));
  Rng dropout_rng(mix_seed(opts.seed, "t2u/dropout"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.index(i)]);
    EpochLoss sum;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);
      m.params().zero_grad();
      EpochLoss batch;
      for (std::size_t i = start; i < end; ++i) {
        T2ULoss loss = forward_train(m, data[order[i]], opts.lambda_dur, &dropout_rng);
        const double total = loss.total.item();
        if (!std::isfinite(total)) {
          throw NumericalError("non-finite t2u loss in epoch " + std::to_string(epoch + 1) + ", batch " +
                               std::to_string(batch_index + 1));
        }
        nn::backward(nn::scale(loss.total, inv));
        batch.total += total;
        batch.ce += loss.ce;
        batch.duration += loss.duration;
      }
      adam.step(m.params());
      if (!m.params().all_finite()) {
        throw NumericalError("non-finite t2u parameters after epoch " + std::to_string(epoch + 1) + ", batch " +
                             std::to_string(batch_index + 1));
      }
      sum.total += batch.total;
      sum.ce += batch.ce;
      sum.duration += batch.duration;
      ++batch_index;
    }
    const double n = static_cast<double>(data.size());
    state.history.push_back({sum.total / n, sum.ce / n, sum.duration / n});
  }
  state.steps = adam.steps();
  m.params().snap_to_f32();
  return state;
}

T2UPrediction predict_units(const T2UModel& m, const TokenSequence& tokens) {
  if (tokens.ids.empty()) throw InvalidInput("predict_units: empty token sequence");
  const Matrix logd = m.predict_log_durations(tokens.ids).value();
  T2UPrediction out;
  const double cap = static_cast<double>(m.config().max_duration);
  for (Eigen::Index i = 0; i < logd.rows(); ++i) {
    const double frames = std::round(std::exp(std::min(logd(i, 0), std::log(cap))));
    out.durations.frames.push_back(static_cast<int>(std::clamp(frames, 1.0, cap)));
  }
  const Matrix logits = m.forward(tokens.ids, out.durations.frames, nullptr).logits.value();
  out.units.ids.resize(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    logits.row(t).maxCoeff(&best);
    out.units.ids[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace unitts
