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

#include "unitts/aligner.hpp"

#include <limits>
#include <numeric>

namespace unitts {

int DurationSequence::total() const { return std::accumulate(frames.begin(), frames.end(), 0); }

void DurationSequence::validate() const {
  if (frames.empty()) throw InvalidInput("duration sequence is empty");
  for (int d : frames) {
    if (d < 1) throw InvalidInput("durations must be >= 1");
  }
}

double segmentation_cost(const Matrix& frames, const std::vector<int>& durations) {
  double total = 0.0;
  Eigen::Index start = 0;
  for (int d : durations) {
    const auto span = frames.middleRows(start, d);
    const Eigen::RowVectorXd mean = span.colwise().mean();
    total += (span.rowwise() - mean).squaredNorm();
    start += d;
  }
  return total;
}

DurationSequence align(const Matrix& raw, int n_tokens) {
  const int frames = static_cast<int>(raw.rows());
  if (n_tokens < 1) throw InvalidInput("alignment needs at least one token");
  if (n_tokens > frames) {
    throw InvalidInput("cannot align " + std::to_string(n_tokens) + " tokens to " + std::to_string(frames) +
                       " frames");
  }
  // Centering reduces cancellation in the prefix-sum variance formula.
  const Eigen::RowVectorXd center = raw.colwise().mean();
  const Matrix x = raw.rowwise() - center;
  const auto dim = x.cols();
  Matrix prefix = Matrix::Zero(frames + 1, dim);
  std::vector<double> prefix_sq(static_cast<std::size_t>(frames) + 1, 0.0);
  for (int t = 0; t < frames; ++t) {
    prefix.row(t + 1) = prefix.row(t) + x.row(t);
    prefix_sq[t + 1] = prefix_sq[t] + x.row(t).squaredNorm();
  }
  // cost[s][e]: SSE of frames [s, e).
  Matrix cost = Matrix::Zero(frames + 1, frames + 1);
  for (int s = 0; s < frames; ++s) {
    for (int e = s + 1; e <= frames; ++e) {
      const double n = e - s;
      const double c = prefix_sq[e] - prefix_sq[s] - (prefix.row(e) - prefix.row(s)).squaredNorm() / n;
      cost(s, e) = c > 0.0 ? c : 0.0;
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best(k, e): first k tokens cover frames [0, e).
  Matrix best = Matrix::Constant(n_tokens + 1, frames + 1, kInf);
  Eigen::MatrixXi back = Eigen::MatrixXi::Constant(n_tokens + 1, frames + 1, -1);
  best(0, 0) = 0.0;
  for (int k = 1; k <= n_tokens; ++k) {
    // The remaining n_tokens - k tokens need at least one frame each.
    for (int e = k; e <= frames - (n_tokens - k); ++e) {
      for (int s = k - 1; s < e; ++s) {
        if (best(k - 1, s) == kInf) continue;
        const double c = best(k - 1, s) + cost(s, e);
        if (c < best(k, e)) {
          best(k, e) = c;
          back(k, e) = s;
        }
      }
    }
  }
  DurationSequence out;
  out.frames.resize(static_cast<std::size_t>(n_tokens));
  int e = frames;
  for (int k = n_tokens; k >= 1; --k) {
    const int s = back(k, e);
    out.frames[k - 1] = e - s;
    e = s;
  }
  return out;
}

DurationSequence align(const FeatureSequence& f, int n_tokens) { return align(f.frames, n_tokens); }

AlignmentBatch align_corpus(const std::vector<Utterance>& utterances, const std::vector<FeatureSequence>& features,
                            const std::vector<TokenSequence>& tokens) {
  if (utterances.size() != features.size() || utterances.size() != tokens.size()) {
    throw InvalidInput("align_corpus needs one feature and token sequence per utterance");
  }
  AlignmentBatch batch;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const int n = static_cast<int>(tokens[i].size());
    const int t = features[i].num_frames();
    if (n < 1 || n > t) {
      batch.skipped.push_back(utterances[i].id + ": " + std::to_string(n) + " tokens for " + std::to_string(t) +
                              " frames");
      continue;
    }
    batch.durations.emplace(utterances[i].id, align(features[i], n));
  }
  return batch;
}

}  // namespace unitts
