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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "unitts/vocoder.hpp"

namespace unitts {
namespace {

VocoderConfig tiny_config() {
  VocoderConfig c;
  c.num_units = 4;
  c.num_speakers = 2;
  c.embed_dim = 4;
  c.upsample = {2, 2};
  c.channels = 8;
  c.dilations = {1, 3};
  c.fft_sizes = {16, 32};
  return c;
}

// Direct O(n^2) DFT version of the loss: Hann window of n, hop n / 4,
// magnitudes sqrt(|X|^2 + 1e-7), mean over resolutions of spectral
// convergence plus mean absolute log-magnitude difference.
double naive_spectral_loss(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::vector<int>& sizes) {
  double total = 0.0;
  for (int n : sizes) {
    const int hop = n / 4;
    const Eigen::Index len = std::max<Eigen::Index>(x.size(), n);
    const int frames = static_cast<int>((len - n) / hop + 1);
    double diff2 = 0.0, ref2 = 0.0, logsum = 0.0;
    int count = 0;
    for (int f = 0; f < frames; ++f) {
      for (int k = 0; k <= n / 2; ++k) {
        double mags[2];
        for (int which = 0; which < 2; ++which) {
          const Eigen::VectorXd& s = which == 0 ? x : y;
          double re = 0.0, im = 0.0;
          for (int i = 0; i < n; ++i) {
            const Eigen::Index at = static_cast<Eigen::Index>(f) * hop + i;
            if (at >= s.size()) continue;
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
            re += s[at] * w * std::cos(2.0 * std::numbers::pi * k * i / n);
            im -= s[at] * w * std::sin(2.0 * std::numbers::pi * k * i / n);
          }
          mags[which] = std::sqrt(re * re + im * im + 1e-7);
        }
        diff2 += (mags[0] - mags[1]) * (mags[0] - mags[1]);
        ref2 += mags[1] * mags[1];
        logsum += std::abs(std::log(mags[0]) - std::log(mags[1]));
        ++count;
      }
    }
    total += std::sqrt(diff2) / std::sqrt(ref2) + logsum / count;
  }
  return total / static_cast<double>(sizes.size());
}

Eigen::VectorXd random_signal(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.3 * rng.normal();
  return v;
}

TEST(SpectralLoss, MatchesDirectDft) {
  Rng rng(1);
  for (int len : {24, 64, 100}) {
    const Eigen::VectorXd x = random_signal(len, rng), y = random_signal(len, rng);
    const std::vector<int> sizes = {16, 32};
    const double got = spectral_loss(nn::Var(Matrix(x)), y, sizes).item();
    EXPECT_NEAR(got, naive_spectral_loss(x, y, sizes), 1e-9 * std::max(1.0, got)) << "len " << len;
  }
}

TEST(SpectralLoss, ZeroForIdenticalSignals) {
  Rng rng(2);
  const Eigen::VectorXd x = random_signal(128, rng);
  std::vector<SpectralLossValue> parts;
  EXPECT_EQ(spectral_loss(nn::Var(Matrix(x)), x, {32, 64}, &parts).item(), 0.0);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_THROW(spectral_loss(nn::Var(Matrix(x)), x.head(10), {32}), InvalidInput);
}

TEST(SpectralLoss, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  const Eigen::VectorXd x = random_signal(96, rng), y = random_signal(96, rng);
  const std::vector<int> sizes = {16, 64};
  nn::Var v(Matrix(x), true);
  nn::backward(spectral_loss(v, y, sizes));
  const Matrix g = v.grad();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, down = x;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double n = (spectral_loss(nn::Var(Matrix(up)), y, sizes).item() -
                      spectral_loss(nn::Var(Matrix(down)), y, sizes).item()) /
                     2e-6;
    worst = std::max(worst, std::abs(n - g(i, 0)) / std::max({std::abs(n), std::abs(g(i, 0)), 1e-4}));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(VocoderConfig, ValidationAndJson) {
  VocoderConfig c;
  EXPECT_EQ(c.hop(), 64);
  nlohmann::json j = c;
  EXPECT_EQ(j.get<VocoderConfig>(), c);
  c.upsample = {3, 4};
  EXPECT_THROW(c.validate(), InvalidInput);
  c = VocoderConfig{};
  c.num_speakers = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(Synthesize, LengthLaw) {
  const VocoderModel m(tiny_config(), 1);
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    UnitSequence u;
    const int n = 1 + static_cast<int>(rng.index(20));
    for (int i = 0; i < n; ++i) u.ids.push_back(static_cast<int>(rng.index(4)));
    const Waveform w = synthesize(m, u, static_cast<int>(rng.index(2)), 16000);
    EXPECT_EQ(w.size(), static_cast<std::size_t>(n) * 4u);
    for (double s : w.samples) ASSERT_LE(std::abs(s), 1.0);
  }
  VocoderModel def(VocoderConfig{}, 2);
  UnitSequence ten{std::vector<int>(10, 3)};
  EXPECT_EQ(synthesize(def, ten, 0, 16000).size(), 640u);
}

TEST(Synthesize, RejectsBadSpeakerAndUnit) {
  VocoderConfig c = tiny_config();
  c.num_speakers = 4;
  const VocoderModel m(c, 3);
  EXPECT_THROW(synthesize(m, {{0, 1}}, 7, 16000), InvalidInput);
  EXPECT_THROW(synthesize(m, {{0, 4}}, 0, 16000), InvalidInput);
  EXPECT_THROW(synthesize(m, {{}}, 0, 16000), InvalidInput);
}

TEST(Synthesize, DeterministicAndSpeakerDependent) {
  const VocoderModel m(tiny_config(), 4);
  const UnitSequence u{{0, 1, 2, 3, 3}};
  EXPECT_EQ(synthesize(m, u, 1, 16000).samples, synthesize(m, u, 1, 16000).samples);
  EXPECT_NE(synthesize(m, u, 0, 16000).samples, synthesize(m, u, 1, 16000).samples);
}

std::vector<VocoderExample> toy_data(const VocoderConfig& c) {
  std::vector<VocoderExample> data;
  for (int spk = 0; spk < 2; ++spk) {
    for (int k = 0; k < 3; ++k) {
      VocoderExample ex;
      ex.speaker = spk;
      for (int t = 0; t < 12; ++t) ex.units.ids.push_back((t / 3 + k) % 4);
      for (std::size_t i = 0; i < ex.units.size() * static_cast<std::size_t>(c.hop()); ++i) {
        const int u = ex.units.ids[i / static_cast<std::size_t>(c.hop())];
        ex.audio.samples.push_back((0.2 + 0.3 * spk) *
                                   std::sin(2.0 * std::numbers::pi * (u + 1) * static_cast<double>(i) / 8.0));
      }
      data.push_back(ex);
    }
  }
  return data;
}

TEST(TrainVocoder, LossDecreases) {
  const VocoderConfig c = tiny_config();
  VocoderModel m(c, 5);
  VocoderTrainOptions o;
  o.epochs = 30;
  o.batch_size = 2;
  o.lr = 3e-3;
  o.seed = 1;
  const auto state = train_vocoder(m, toy_data(c), o);
  ASSERT_EQ(state.history.size(), 30u);
  EXPECT_LT(state.history.back().spectral, state.history.front().spectral);
  EXPECT_NEAR(state.history.back().total, state.history.back().spectral + c.l1_weight * state.history.back().l1,
              1e-9);
}

TEST(TrainVocoder, ZeroEpochsAndDeterminism) {
  const VocoderConfig c = tiny_config();
  VocoderModel m(c, 6);
  const std::string before = m.serialize();
  VocoderTrainOptions o;
  o.epochs = 0;
  EXPECT_TRUE(train_vocoder(m, toy_data(c), o).history.empty());
  EXPECT_EQ(m.serialize(), before);

  o.epochs = 2;
  o.segment_frames = 4;
  o.seed = 9;
  VocoderModel a(c, 6), b(c, 6);
  train_vocoder(a, toy_data(c), o);
  train_vocoder(b, toy_data(c), o);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_NE(a.serialize(), before);
}

TEST(PrepareExamples, TruncatesAndRejectsShortAudio) {
  VocoderExample ex;
  ex.units.ids = {0, 1, 2};
  ex.audio.samples.assign(14, 0.1);
  const auto out = prepare_vocoder_examples({ex}, 4);
  EXPECT_EQ(out[0].audio.size(), 12u);
  ex.audio.samples.assign(11, 0.1);
  EXPECT_THROW(prepare_vocoder_examples({ex}, 4), InvalidInput);
}

TEST(Checkpoint, VocoderSaveLoadBitExact) {
  const VocoderModel m(tiny_config(), 7);
  testing::TempDir dir("voc");
  m.save(dir.file("v.ckpt"));
  const VocoderModel back = VocoderModel::load(dir.file("v.ckpt"));
  EXPECT_EQ(back.config(), m.config());
  EXPECT_EQ(back.serialize(), m.serialize());
  const UnitSequence u{{3, 2, 1}};
  EXPECT_EQ(synthesize(back, u, 1, 16000).samples, synthesize(m, u, 1, 16000).samples);
}

}  // namespace
}  // namespace unitts
