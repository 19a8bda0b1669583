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

#include "unitts/features.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/FFT>

namespace unitts {

void FeatureConfig::validate() const {
  if (sample_rate <= 0) throw InvalidInput("feature sample_rate must be positive");
  if (hop <= 0 || window < hop) throw InvalidInput("feature config needs 0 < hop <= window");
  if (n_bands < 2) throw InvalidInput("feature config needs n_bands >= 2");
}

int FeatureConfig::fft_size() const {
  int n = 1;
  while (n < std::max(window, 512)) n <<= 1;
  return n;
}

std::string FeatureConfig::fingerprint() const {
  const std::string desc = "features/v1;sr=" + std::to_string(sample_rate) + ";hop=" + std::to_string(hop) +
                           ";win=" + std::to_string(window) + ";bands=" + std::to_string(n_bands) +
                           ";norm=" + std::to_string(normalize ? 1 : 0) + ";nfft=" + std::to_string(fft_size());
  return hex64(fnv1a(desc));
}

void to_json(nlohmann::json& j, const FeatureConfig& c) {
  j = nlohmann::json{{"sample_rate", c.sample_rate},
                     {"hop", c.hop},
                     {"window", c.window},
                     {"n_bands", c.n_bands},
                     {"normalize", c.normalize}};
}

void from_json(const nlohmann::json& j, FeatureConfig& c) {
  FeatureConfig d;
  c.sample_rate = j.value("sample_rate", d.sample_rate);
  c.hop = j.value("hop", d.hop);
  c.window = j.value("window", 2 * c.hop);
  c.n_bands = j.value("n_bands", d.n_bands);
  c.normalize = j.value("normalize", d.normalize);
}

int frame_count(std::size_t num_samples, const FeatureConfig& cfg) {
  if (num_samples < static_cast<std::size_t>(cfg.window)) return 0;
  return static_cast<int>((num_samples - static_cast<std::size_t>(cfg.window)) / cfg.hop) + 1;
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// n_bands x (fft/2 + 1) triangular filters, edges equally spaced in mel.
Matrix mel_filterbank(const FeatureConfig& cfg) {
  const int bins = cfg.fft_size() / 2 + 1;
  const double top = hz_to_mel(cfg.sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_bands) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(cfg.n_bands + 1));
  }
  Matrix fb = Matrix::Zero(cfg.n_bands, bins);
  for (int b = 0; b < cfg.n_bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size();
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      fb(b, k) = w;
    }
  }
  return fb;
}

}  // namespace

FeatureSequence extract_features(const Waveform& w, const FeatureConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw InvalidInput("waveform rate " + std::to_string(w.sample_rate) + " Hz does not match feature config " +
                       std::to_string(cfg.sample_rate) + " Hz");
  }
  const int frames = frame_count(w.size(), cfg);
  if (frames == 0) {
    throw InvalidInput("waveform of " + std::to_string(w.size()) + " samples is shorter than the " +
                       std::to_string(cfg.window) + "-sample window");
  }
  const int nfft = cfg.fft_size();
  const int bins = nfft / 2 + 1;
  const Matrix fb = mel_filterbank(cfg);
  std::vector<double> hann(static_cast<std::size_t>(cfg.window));
  for (int n = 0; n < cfg.window; ++n) {
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg.window);
  }

  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(nfft));
  std::vector<std::complex<double>> spec;
  Eigen::VectorXd power(bins);

  FeatureSequence out;
  out.config = cfg;
  out.frames.resize(frames, cfg.n_bands);
  for (int t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int n = 0; n < cfg.window; ++n) buf[n] = w.samples[start + n] * hann[n];
    fft.fwd(spec, buf);
    for (int k = 0; k < bins; ++k) power[k] = std::norm(spec[k]);
    const Eigen::VectorXd energy = fb * power;
    for (int b = 0; b < cfg.n_bands; ++b) out.frames(t, b) = std::log(energy[b] + kLogFloor);
  }
  if (cfg.normalize) return normalize_features(out);
  return out;
}

FeatureSequence normalize_features(const FeatureSequence& f) {
  if (f.num_frames() < 2) throw InvalidInput("normalization needs at least 2 frames");
  FeatureSequence out = f;
  const double n = static_cast<double>(f.num_frames());
  for (int d = 0; d < f.dim(); ++d) {
    const double mean = f.frames.col(d).mean();
    const double var = (f.frames.col(d).array() - mean).square().sum() / n;
    const double scale = 1.0 / std::sqrt(std::max(var, kVarianceFloor));
    out.frames.col(d) = (f.frames.col(d).array() - mean) * scale;
  }
  return out;
}

void write_feature_dump(const FeatureSequence& f, std::ostream& os) {
  binio::write_magic(os, "FEAT");
  binio::write_u8(os, 1);
  binio::write_u32(os, static_cast<std::uint32_t>(f.num_frames()));
  binio::write_u32(os, static_cast<std::uint32_t>(f.dim()));
  for (int t = 0; t < f.num_frames(); ++t) {
    for (int d = 0; d < f.dim(); ++d) binio::write_f32(os, static_cast<float>(f.frames(t, d)));
  }
}

Matrix read_feature_dump(std::istream& is) {
  binio::expect_magic(is, "FEAT");
  const auto version = binio::read_u8(is);
  if (version != 1) throw InvalidInput("unsupported FEAT version " + std::to_string(version));
  const auto rows = binio::read_u32(is);
  const auto cols = binio::read_u32(is);
  Matrix m(rows, cols);
  for (std::uint32_t t = 0; t < rows; ++t) {
    for (std::uint32_t d = 0; d < cols; ++d) m(t, d) = binio::read_f32(is);
  }
  return m;
}

}  // namespace unitts
