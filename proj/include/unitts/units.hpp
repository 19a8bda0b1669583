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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "unitts/common.hpp"
#include "unitts/features.hpp"

namespace unitts {

/// Frame-rate discrete units, 0-based ids in [0, K).
struct UnitSequence {
  std::vector<int> ids;

  std::size_t size() const { return ids.size(); }
  bool operator==(const UnitSequence&) const = default;
};

struct RunLengthUnits {
  std::vector<std::pair<int, int>> runs;  // (unit id, frames)
  bool operator==(const RunLengthUnits&) const = default;
};

class Codebook {
 public:
  Codebook() = default;
  Codebook(Matrix centroids, std::string fingerprint);

  int size() const { return static_cast<int>(centroids_.rows()); }
  int dim() const { return static_cast<int>(centroids_.cols()); }
  const Matrix& centroids() const { return centroids_; }
  const std::string& fingerprint() const { return fingerprint_; }

  // Nearest centroid by squared Euclidean distance; lowest index on ties.
  int nearest(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  // "UCBK", version u8, K u32, dim u32, centroids f32 LE, fingerprint.
  void save(std::ostream& os) const;
  static Codebook load(std::istream& is);
  void save(const std::string& path) const;
  static Codebook load(const std::string& path);

 private:
  Matrix centroids_;
  std::string fingerprint_;
};

struct KMeansOptions {
  int max_iters = 100;
  double tol = 1e-6;
  // Independent seedings; the run with the lowest final SSE is kept.
  int restarts = 1;
};

struct KMeansResult {
  Matrix centroids;
  std::vector<int> assignment;
  std::vector<double> objective;  // total SSE after each assignment step
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded
/// with the point farthest from its current centroid.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

Codebook train_codebook(const std::vector<FeatureSequence>& features, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

UnitSequence quantize(const FeatureSequence& f, const Codebook& cb);

RunLengthUnits run_length(const UnitSequence& u);
UnitSequence expand(const RunLengthUnits& r);

// JSON-lines dumps: {"id": ..., "<key>": [ints]}.
std::string format_id_lists(const std::vector<std::pair<std::string, std::vector<int>>>& rows, const std::string& key);
std::vector<std::pair<std::string, std::vector<int>>> parse_id_lists(const std::string& text, const std::string& key);

}  // namespace unitts
