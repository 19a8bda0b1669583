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

#include "unitts/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace unitts {

double unit_accuracy(const UnitSequence& pred, const UnitSequence& ref) {
  if (pred.ids.empty() || ref.ids.empty()) throw InvalidInput("unit_accuracy: empty sequence");
  if (pred.size() != ref.size()) {
    throw InvalidInput("unit_accuracy: lengths differ (" + std::to_string(pred.size()) + " vs " +
                       std::to_string(ref.size()) + ")");
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) same += pred.ids[i] == ref.ids[i];
  return static_cast<double>(same) / static_cast<double>(pred.size());
}

double unit_accuracy_truncated(const UnitSequence& pred, const UnitSequence& ref) {
  const std::size_t n = std::min(pred.size(), ref.size());
  if (n == 0) throw InvalidInput("unit_accuracy: empty sequence");
  UnitSequence a{{pred.ids.begin(), pred.ids.begin() + static_cast<std::ptrdiff_t>(n)}};
  UnitSequence b{{ref.ids.begin(), ref.ids.begin() + static_cast<std::ptrdiff_t>(n)}};
  return unit_accuracy(a, b);
}

double duration_mae(const std::vector<DurationSequence>& pred, const std::vector<DurationSequence>& ref) {
  if (pred.size() != ref.size()) throw InvalidInput("duration_mae: sequence counts differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != ref[i].size()) throw InvalidInput("duration_mae: token counts differ");
    for (std::size_t k = 0; k < pred[i].size(); ++k) sum += std::abs(pred[i].frames[k] - ref[i].frames[k]);
    n += pred[i].size();
  }
  if (n == 0) throw InvalidInput("duration_mae: no tokens");
  return sum / static_cast<double>(n);
}

std::vector<int> max_weight_assignment(const Matrix& weights) {
  const int n = static_cast<int>(weights.rows());
  if (n == 0 || weights.cols() != n) throw InvalidInput("assignment: weight matrix must be square and non-empty");
  // Shortest augmenting paths with potentials on cost = -weight; 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return assignment;
}

PermutedAgreement permuted_agreement(const std::vector<UnitSequence>& pred, const std::vector<UnitSequence>& ref,
                                     int k) {
  if (k < 1) throw InvalidInput("permuted_agreement: K must be >= 1");
  if (pred.size() != ref.size()) throw InvalidInput("permuted_agreement: sequence counts differ");
  Matrix confusion = Matrix::Zero(k, k);
  std::size_t total = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != ref[s].size()) {
      throw InvalidInput("permuted_agreement: sequence " + std::to_string(s) + " lengths differ");
    }
    for (std::size_t t = 0; t < pred[s].size(); ++t) {
      const int a = pred[s].ids[t], b = ref[s].ids[t];
      if (a < 0 || b < 0 || a >= k || b >= k) {
        throw InvalidInput("permuted_agreement: unit id " + std::to_string(std::max(a, b)) + " not below K = " +
                           std::to_string(k));
      }
      confusion(a, b) += 1.0;
    }
    total += pred[s].size();
  }
  if (total == 0) throw InvalidInput("permuted_agreement: no frames");
  PermutedAgreement out;
  out.permutation = max_weight_assignment(confusion);
  double agree = 0.0;
  for (int a = 0; a < k; ++a) agree += confusion(a, out.permutation[static_cast<std::size_t>(a)]);
  out.rate = agree / static_cast<double>(total);
  return out;
}

SpeakerProbe::SpeakerProbe(const std::vector<LabeledWaveform>& train, FeatureConfig cfg) : cfg_(cfg) {
  cfg_.normalize = false;
  if (train.empty()) throw InvalidInput("speaker probe: empty training set");
  for (const auto& ex : train) speakers_.push_back(ex.speaker);
  std::sort(speakers_.begin(), speakers_.end());
  speakers_.erase(std::unique(speakers_.begin(), speakers_.end()), speakers_.end());
  centroids_ = Matrix::Zero(static_cast<Eigen::Index>(speakers_.size()), cfg_.n_bands);
  std::vector<int> counts(speakers_.size(), 0);
  for (const auto& ex : train) {
    const auto idx = std::lower_bound(speakers_.begin(), speakers_.end(), ex.speaker) - speakers_.begin();
    centroids_.row(idx) += embed(ex.audio);
    ++counts[static_cast<std::size_t>(idx)];
  }
  for (std::size_t s = 0; s < speakers_.size(); ++s) {
    centroids_.row(static_cast<Eigen::Index>(s)) /= counts[s];
  }
}

Eigen::RowVectorXd SpeakerProbe::embed(const Waveform& w) const {
  return extract_features(w, cfg_).frames.colwise().mean();
}

std::string SpeakerProbe::classify(const Waveform& w) const {
  const Eigen::RowVectorXd e = embed(w);
  Eigen::Index best = 0;
  (centroids_.rowwise() - e).rowwise().squaredNorm().minCoeff(&best);
  return speakers_[static_cast<std::size_t>(best)];
}

double SpeakerProbe::accuracy(const std::vector<LabeledWaveform>& test) const {
  if (test.empty()) throw InvalidInput("speaker probe: empty test set");
  for (const auto& ex : test) {
    if (!std::binary_search(speakers_.begin(), speakers_.end(), ex.speaker)) {
      throw InvalidInput("speaker probe: test speaker '" + ex.speaker + "' has no training data");
    }
  }
  std::size_t hits = 0;
  for (const auto& ex : test) hits += classify(ex.audio) == ex.speaker;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

double speaker_probe(const std::vector<LabeledWaveform>& train, const std::vector<LabeledWaveform>& test,
                     const FeatureConfig& cfg) {
  return SpeakerProbe(train, cfg).accuracy(test);
}

double round_trip_recovery(const Waveform& synthesized, const UnitSequence& source, const Codebook& cb,
                           const FeatureConfig& cfg) {
  return unit_accuracy_truncated(quantize(extract_features(synthesized, cfg), cb), source);
}

namespace {

nlohmann::json metrics_json(const EvalMetrics& m) {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("unit_accuracy", m.unit_accuracy);
  put("duration_mae", m.duration_mae);
  put("aligner_mae", m.aligner_mae);
  put("codebook_agreement", m.codebook_agreement);
  put("speaker_probe", m.speaker_probe);
  put("round_trip", m.round_trip);
  return j;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << *v;
  return os.str();
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["overall"] = metrics_json(overall);
  j["languages"] = nlohmann::json::object();
  for (const auto& [lang, m] : languages) j["languages"][lang] = metrics_json(m);
  return j;
}

std::string EvalReport::to_table() const {
  const std::vector<std::string> header = {"scope",     "unit_acc",  "dur_mae",   "aligner_mae",
                                           "agreement", "spk_probe", "round_trip"};
  std::vector<std::vector<std::string>> rows;
  auto add = [&rows](const std::string& name, const EvalMetrics& m) {
    rows.push_back({name, cell(m.unit_accuracy), cell(m.duration_mae), cell(m.aligner_mae), cell(m.codebook_agreement),
                    cell(m.speaker_probe), cell(m.round_trip)});
  };
  for (const auto& [lang, m] : languages) add(lang, m);
  add("overall", overall);
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << r[c];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
      }
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

nlohmann::json CrossLingualReport::to_json() const {
  nlohmann::json j;
  j["language"] = language;
  j["utterances"] = utterances;
  j["units_identical"] = units_identical;
  j["speakers"] = nlohmann::json::array();
  for (const auto& s : speakers) {
    j["speakers"].push_back({{"speaker", s.speaker}, {"probe_accuracy", s.probe_accuracy}, {"recovery", s.recovery}});
  }
  return j;
}

CrossLingualReport cross_lingual_report(const ModelSet& models, const std::vector<TokenSequence>& texts,
                                        const std::vector<std::string>& speakers, const SpeakerProbe& probe) {
  if (!models.t2u || !models.vocoder || !models.codebook || !models.speakers) {
    throw InvalidInput("cross_lingual_report: incomplete model set");
  }
  if (texts.empty() || speakers.empty()) throw InvalidInput("cross_lingual_report: need texts and speakers");
  CrossLingualReport report;
  report.language = texts.front().language;
  report.utterances = texts.size();
  report.units_identical = true;
  std::vector<std::size_t> indices;
  for (const auto& s : speakers) {
    if (!models.speakers->contains(s)) throw InvalidInput("cross_lingual_report: unknown speaker '" + s + "'");
    indices.push_back(models.speakers->index(s));
  }
  std::vector<std::size_t> hits(speakers.size(), 0);
  std::vector<double> recovery(speakers.size(), 0.0);
  for (const auto& tokens : texts) {
    std::optional<UnitSequence> shared;
    for (std::size_t s = 0; s < speakers.size(); ++s) {
      // Recomputed per speaker and compared.
      const UnitSequence units = predict_units(*models.t2u, tokens).units;
      if (!shared) {
        shared = units;
      } else if (units != *shared) {
        throw Error("cross-lingual: unit sequences differ between target speakers");
      }
      const Waveform w = synthesize(*models.vocoder, units, static_cast<int>(indices[s]), models.sample_rate);
      hits[s] += probe.classify(w) == speakers[s];
      recovery[s] += round_trip_recovery(w, units, *models.codebook, models.features);
    }
  }
  for (std::size_t s = 0; s < speakers.size(); ++s) {
    const double n = static_cast<double>(texts.size());
    report.speakers.push_back({speakers[s], static_cast<double>(hits[s]) / n, recovery[s] / n});
  }
  return report;
}

}  // namespace unitts
