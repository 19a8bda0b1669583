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

#include "unitts/vocoder.hpp"

#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "unitts/nn/checkpoint.hpp"
#include "unitts/nn/optim.hpp"

namespace unitts {

using nn::Var;

int VocoderConfig::hop() const {
  return std::accumulate(upsample.begin(), upsample.end(), 1, std::multiplies<>());
}

void VocoderConfig::validate() const {
  if (num_units < 2) throw InvalidInput("vocoder config: num_units must be >= 2");
  if (num_speakers < 1) throw InvalidInput("vocoder config: num_speakers must be >= 1");
  if (embed_dim < 1) throw InvalidInput("vocoder config: embed_dim must be >= 1");
  if (upsample.empty()) throw InvalidInput("vocoder config: upsample factors must be non-empty");
  for (int u : upsample) {
    if (u < 1 || u % 2 != 0) throw InvalidInput("vocoder config: upsample factors must be even and >= 2");
  }
  if (channels < (1 << upsample.size())) {
    throw InvalidInput("vocoder config: channels too small to halve " + std::to_string(upsample.size()) + " times");
  }
  if (dilations.empty()) throw InvalidInput("vocoder config: dilations must be non-empty");
  for (int d : dilations) {
    if (d < 1) throw InvalidInput("vocoder config: dilations must be >= 1");
  }
  if (resblock_kernel < 1 || resblock_kernel % 2 == 0 || io_kernel < 1 || io_kernel % 2 == 0) {
    throw InvalidInput("vocoder config: kernels must be odd");
  }
  if (fft_sizes.empty()) throw InvalidInput("vocoder config: fft_sizes must be non-empty");
  for (int n : fft_sizes) {
    if (n < 4 || (n & (n - 1)) != 0) throw InvalidInput("vocoder config: fft sizes must be powers of two >= 4");
  }
  if (l1_weight < 0.0) throw InvalidInput("vocoder config: l1_weight must be >= 0");
}

void to_json(nlohmann::json& j, const VocoderConfig& c) {
  j = {{"num_units", c.num_units},
       {"num_speakers", c.num_speakers},
       {"embed_dim", c.embed_dim},
       {"upsample", c.upsample},
       {"channels", c.channels},
       {"dilations", c.dilations},
       {"resblock_kernel", c.resblock_kernel},
       {"io_kernel", c.io_kernel},
       {"fft_sizes", c.fft_sizes},
       {"l1_weight", c.l1_weight}};
}

void from_json(const nlohmann::json& j, VocoderConfig& c) {
  VocoderConfig d;
  c.num_units = j.value("num_units", d.num_units);
  c.num_speakers = j.value("num_speakers", d.num_speakers);
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.upsample = j.value("upsample", d.upsample);
  c.channels = j.value("channels", d.channels);
  c.dilations = j.value("dilations", d.dilations);
  c.resblock_kernel = j.value("resblock_kernel", d.resblock_kernel);
  c.io_kernel = j.value("io_kernel", d.io_kernel);
  c.fft_sizes = j.value("fft_sizes", d.fft_sizes);
  c.l1_weight = j.value("l1_weight", d.l1_weight);
}

// --- spectral loss ---------------------------------------------------------

namespace {

constexpr double kMagFloor = 1e-7;
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Stft {
  int n = 0, hop = 0, frames = 0, bins = 0;
  Matrix re, im, mag;  // frames x bins
};

Eigen::VectorXd hann(int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / n);
  return w;
}

Stft stft(const Eigen::VectorXd& x, int n, const Eigen::VectorXd& window, Eigen::FFT<double>& fft) {
  Stft s;
  s.n = n;
  s.hop = n / 4;
  s.bins = n / 2 + 1;
  const Eigen::Index len = std::max<Eigen::Index>(x.size(), n);
  s.frames = static_cast<int>((len - n) / s.hop + 1);
  s.re.resize(s.frames, s.bins);
  s.im.resize(s.frames, s.bins);
  s.mag.resize(s.frames, s.bins);
  std::vector<double> buf(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> spec;
  for (int f = 0; f < s.frames; ++f) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Index at = static_cast<Eigen::Index>(f) * s.hop + i;
      buf[static_cast<std::size_t>(i)] = at < x.size() ? x[at] * window[i] : 0.0;
    }
    fft.fwd(spec, buf);
    for (int k = 0; k < s.bins; ++k) {
      const auto c = spec[static_cast<std::size_t>(k)];
      s.re(f, k) = c.real();
      s.im(f, k) = c.imag();
      s.mag(f, k) = std::sqrt(c.real() * c.real() + c.imag() * c.imag() + kMagFloor);
    }
  }
  return s;
}

}  // namespace

Var spectral_loss(const Var& predicted, const Eigen::VectorXd& target, const std::vector<int>& fft_sizes,
                  std::vector<SpectralLossValue>* parts) {
  if (predicted.cols() != 1 || predicted.rows() != target.size()) {
    throw InvalidInput("spectral_loss: prediction and target lengths differ");
  }
  if (fft_sizes.empty()) throw InvalidInput("spectral_loss: no resolutions");
  const Eigen::VectorXd x = predicted.value().col(0);
  Eigen::FFT<double> fft;
  const double inv_res = 1.0 / static_cast<double>(fft_sizes.size());
  double total = 0.0;
  // dL/dx accumulated eagerly; the op only needs to scale it on backward.
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
  if (parts) parts->clear();
  for (int n : fft_sizes) {
    const Eigen::VectorXd window = hann(n);
    const Stft p = stft(x, n, window, fft);
    const Stft t = stft(target, n, window, fft);
    const Matrix diff = p.mag - t.mag;
    const double diff_norm = diff.norm();
    const double ref_norm = std::max(t.mag.norm(), 1e-12);
    const Matrix log_diff = (p.mag.array().log() - t.mag.array().log()).matrix();
    const double count = static_cast<double>(log_diff.size());
    SpectralLossValue v{diff_norm / ref_norm, log_diff.cwiseAbs().sum() / count};
    total += inv_res * (v.convergence + v.log_magnitude);
    if (parts) parts->push_back(v);

    // Gradient of this resolution's terms with respect to the magnitudes.
    Matrix gmag = log_diff.array().sign().matrix().cwiseQuotient(p.mag) / count;
    if (diff_norm > 0.0) gmag += diff / (diff_norm * ref_norm);
    gmag *= inv_res;
    std::vector<std::complex<double>> g(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> back;
    for (int f = 0; f < p.frames; ++f) {
      std::fill(g.begin(), g.end(), std::complex<double>(0.0, 0.0));
      for (int k = 0; k < p.bins; ++k) {
        const double s = gmag(f, k) / p.mag(f, k);
        g[static_cast<std::size_t>(k)] = {s * p.re(f, k), s * p.im(f, k)};
      }
      fft.inv(back, g);  // scaled by 1/n
      for (int i = 0; i < n; ++i) {
        const Eigen::Index at = static_cast<Eigen::Index>(f) * p.hop + i;
        if (at < x.size()) grad[at] += window[i] * back[static_cast<std::size_t>(i)].real() * n;
      }
    }
  }
  Matrix value(1, 1);
  value(0, 0) = total;
  return nn::make_op(std::move(value), {predicted}, [grad = std::move(grad)](nn::Node& node) {
    node.parents[0]->grad_buffer().col(0) += grad * node.grad(0, 0);
  });
}

// --- model -----------------------------------------------------------------

VocoderModel::VocoderModel(const VocoderConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  build(seed);
  params_.snap_to_f32();
}

void VocoderModel::build(std::uint64_t seed) {
  Rng rng(mix_seed(seed, "vocoder/init"));
  const int e = config_.embed_dim, s = config_.num_speakers, io = config_.io_kernel, rk = config_.resblock_kernel;
  auto zeros = [](int n) { return Matrix(Matrix::Zero(1, n)); };
  embedding_ = params_.add("embedding", nn::normal_init(config_.num_units, e, 1.0, rng));
  int ch = config_.channels;
  pre_w_ = params_.add("pre.w", nn::xavier_init(io * (e + s), ch, io * (e + s), ch, rng));
  pre_b_ = params_.add("pre.b", zeros(ch));
  for (std::size_t i = 0; i < config_.upsample.size(); ++i) {
    const int u = config_.upsample[i];
    const int out = ch / 2;
    const std::string prefix = "stage" + std::to_string(i);
    Stage st;
    st.up_w = params_.add(prefix + ".up.w", nn::xavier_init(ch, 2 * u * out, ch, 2 * out, rng));
    st.up_b = params_.add(prefix + ".up.b", zeros(out));
    for (std::size_t r = 0; r < config_.dilations.size(); ++r) {
      const std::string rp = prefix + ".res" + std::to_string(r);
      ResUnit ru{};
      ru.w1 = params_.add(rp + ".conv1.w", nn::xavier_init(rk * out, out, rk * out, out, rng));
      ru.b1 = params_.add(rp + ".conv1.b", zeros(out));
      ru.w2 = params_.add(rp + ".conv2.w", nn::xavier_init(rk * out, out, rk * out, out, rng));
      ru.b2 = params_.add(rp + ".conv2.b", zeros(out));
      st.res.push_back(ru);
    }
    stages_.push_back(std::move(st));
    ch = out;
  }
  post_w_ = params_.add("post.w", nn::xavier_init(io * ch, 1, io * ch, 1, rng));
  post_b_ = params_.add("post.b", zeros(1));
}

Var VocoderModel::forward(const std::vector<int>& units, int speaker) const {
  if (units.empty()) throw InvalidInput("vocoder: empty unit sequence");
  for (int u : units) {
    if (u < 0 || u >= config_.num_units) {
      throw InvalidInput("vocoder: unit id " + std::to_string(u) + " outside codebook of " +
                         std::to_string(config_.num_units));
    }
  }
  if (speaker < 0 || speaker >= config_.num_speakers) {
    throw InvalidInput("vocoder: speaker index " + std::to_string(speaker) + " outside [0, " +
                       std::to_string(config_.num_speakers) + ")");
  }
  const auto& p = params_;
  Matrix onehot = Matrix::Zero(static_cast<Eigen::Index>(units.size()), config_.num_speakers);
  onehot.col(speaker).setOnes();
  Var x = nn::concat_cols({nn::gather_rows(p[embedding_], units), nn::constant(std::move(onehot))});
  x = nn::conv1d(x, p[pre_w_], p[pre_b_], config_.io_kernel);
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const Stage& st = stages_[i];
    const int u = config_.upsample[i];
    x = nn::conv_transpose1d(nn::leaky_relu(x, 0.1), p[st.up_w], p[st.up_b], 2 * u, u);
    for (std::size_t r = 0; r < st.res.size(); ++r) {
      const ResUnit& ru = st.res[r];
      Var t = nn::conv1d(nn::leaky_relu(x, 0.1), p[ru.w1], p[ru.b1], config_.resblock_kernel, config_.dilations[r]);
      t = nn::conv1d(nn::leaky_relu(t, 0.1), p[ru.w2], p[ru.b2], config_.resblock_kernel, 1);
      x = nn::add(x, t);
    }
  }
  x = nn::conv1d(nn::leaky_relu(x, 0.1), p[post_w_], p[post_b_], config_.io_kernel);
  return nn::tanh(x);
}

std::string VocoderModel::serialize() const {
  return nn::encode_checkpoint(nn::Checkpoint{"vocoder", nlohmann::json(config_).dump(), params_});
}

void VocoderModel::save(const std::string& path) const {
  nn::save_checkpoint(path, nn::Checkpoint{"vocoder", nlohmann::json(config_).dump(), params_});
}

VocoderModel VocoderModel::load(const std::string& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != "vocoder") throw ArtifactError(path + ": checkpoint kind '" + ck.kind + "' is not vocoder");
  VocoderConfig cfg;
  try {
    cfg = nlohmann::json::parse(ck.config_json).get<VocoderConfig>();
    cfg.validate();
  } catch (const std::exception& e) {
    throw ArtifactError(path + ": bad vocoder config: " + e.what());
  }
  VocoderModel m(cfg, 0);
  nn::assign_params(m.params_, ck.params);
  return m;
}

Waveform synthesize(const VocoderModel& m, const UnitSequence& units, int speaker, int sample_rate) {
  const Matrix y = m.forward(units.ids, speaker).value();
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index i = 0; i < y.rows(); ++i) w.samples[static_cast<std::size_t>(i)] = std::clamp(y(i, 0), -1.0, 1.0);
  return w;
}

// --- training ----------------------------------------------------------------

std::vector<VocoderExample> prepare_vocoder_examples(std::vector<VocoderExample> examples, int hop) {
  if (hop < 1) throw InvalidInput("prepare_vocoder_examples: hop must be >= 1");
  for (auto& ex : examples) {
    const std::size_t want = ex.units.size() * static_cast<std::size_t>(hop);
    if (ex.audio.samples.size() < want) {
      throw InvalidInput("vocoder example has " + std::to_string(ex.audio.samples.size()) + " samples, " +
                         std::to_string(ex.units.size()) + " units need " + std::to_string(want));
    }
    ex.audio.samples.resize(want);
  }
  return examples;
}

VocoderTrainingState train_vocoder(VocoderModel& m, const std::vector<VocoderExample>& data,
                                   const VocoderTrainOptions& opts) {
  if (opts.epochs < 0) throw InvalidInput("train_vocoder: epochs must be >= 0");
  if (opts.batch_size < 1) throw InvalidInput("train_vocoder: batch_size must be >= 1");
  if (opts.segment_frames < 0) throw InvalidInput("train_vocoder: segment_frames must be >= 0");
  VocoderTrainingState state;
  if (opts.epochs == 0) return state;
  if (data.empty()) throw InvalidInput("train_vocoder: no training examples");
  const VocoderConfig& cfg = m.config();
  const int hop = cfg.hop();
  for (const auto& ex : data) {
    if (ex.units.ids.empty()) throw InvalidInput("train_vocoder: empty unit sequence");
    if (ex.audio.samples.size() != ex.units.size() * static_cast<std::size_t>(hop)) {
      throw InvalidInput("train_vocoder: waveform length " + std::to_string(ex.audio.samples.size()) +
                         " != units x hop = " + std::to_string(ex.units.size() * static_cast<std::size_t>(hop)));
    }
  }
  nn::Adam adam(m.params(), nn::AdamOptions{opts.lr, 0.9, 0.999, 1e-8, opts.clip_norm});
  Rng shuffle_rng(mix_seed(opts.seed, "vocoder/shuffle"));
  Rng crop_rng(mix_seed(opts.seed, "vocoder/crop"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.index(i)]);
    VocoderEpochLoss sum;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);
      m.params().zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const VocoderExample& ex = data[order[i]];
        const int frames = static_cast<int>(ex.units.size());
        int first = 0, count = frames;
        if (opts.segment_frames > 0 && frames > opts.segment_frames) {
          count = opts.segment_frames;
          first = static_cast<int>(crop_rng.index(static_cast<std::size_t>(frames - count + 1)));
        }
        std::vector<int> units(ex.units.ids.begin() + first, ex.units.ids.begin() + first + count);
        Eigen::VectorXd target(static_cast<Eigen::Index>(count) * hop);
        for (Eigen::Index k = 0; k < target.size(); ++k) {
          target[k] = ex.audio.samples[static_cast<std::size_t>(first) * hop + static_cast<std::size_t>(k)];
        }
        Var y = m.forward(units, ex.speaker);
        Var spec = spectral_loss(y, target, cfg.fft_sizes);
        Var wave = nn::l1(y, target);
        Var loss = nn::add(spec, nn::scale(wave, cfg.l1_weight));
        const double total = loss.item();
        if (!std::isfinite(total)) {
          throw NumericalError("non-finite vocoder loss in epoch " + std::to_string(epoch + 1) + ", batch " +
                               std::to_string(batch_index + 1));
        }
        nn::backward(nn::scale(loss, inv));
        sum.total += total;
        sum.spectral += spec.item();
        sum.l1 += wave.item();
      }
      adam.step(m.params());
      if (!m.params().all_finite()) {
        throw NumericalError("non-finite vocoder parameters after epoch " + std::to_string(epoch + 1) + ", batch " +
                             std::to_string(batch_index + 1));
      }
      ++batch_index;
    }
    const double n = static_cast<double>(data.size());
    state.history.push_back({sum.total / n, sum.spectral / n, sum.l1 / n});
  }
  state.steps = adam.steps();
  m.params().snap_to_f32();
  return state;
}

}  // namespace unitts
