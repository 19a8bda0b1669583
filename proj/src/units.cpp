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

#include "unitts/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace unitts {

Codebook::Codebook(Matrix centroids, std::string fingerprint)
    : centroids_(std::move(centroids)), fingerprint_(std::move(fingerprint)) {
  if (centroids_.rows() < 2) throw InvalidInput("codebook needs K >= 2");
  if (!centroids_.allFinite()) throw InvalidInput("codebook centroids must be finite");
}

int Codebook::nearest(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double d = (centroids_.row(k) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

void Codebook::save(std::ostream& os) const {
  binio::write_magic(os, "UCBK");
  binio::write_u8(os, 1);
  binio::write_u32(os, static_cast<std::uint32_t>(size()));
  binio::write_u32(os, static_cast<std::uint32_t>(dim()));
  for (int k = 0; k < size(); ++k) {
    for (int d = 0; d < dim(); ++d) binio::write_f32(os, static_cast<float>(centroids_(k, d)));
  }
  binio::write_string(os, fingerprint_);
}

Codebook Codebook::load(std::istream& is) {
  binio::expect_magic(is, "UCBK");
  const auto version = binio::read_u8(is);
  if (version != 1) throw InvalidInput("unsupported UCBK version " + std::to_string(version));
  const auto k = binio::read_u32(is);
  const auto dim = binio::read_u32(is);
  Matrix c(k, dim);
  for (std::uint32_t i = 0; i < k; ++i) {
    for (std::uint32_t d = 0; d < dim; ++d) c(i, d) = binio::read_f32(is);
  }
  auto fp = binio::read_string(is);
  return Codebook(std::move(c), std::move(fp));
}

void Codebook::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write codebook '" + path + "'");
  save(out);
}

Codebook Codebook::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read codebook '" + path + "'");
  return load(in);
}

namespace {

double assign(const Matrix& points, const Matrix& centroids, std::vector<int>& assignment,
              std::vector<double>& dist) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
      const double d = (centroids.row(k) - points.row(i)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    assignment[i] = best;
    dist[i] = best_d;
    total += best_d;
  }
  return total;
}

// Greedy k-means++: each new centre is the best (lowest resulting
// potential) of several D^2-sampled candidates.
Matrix kmeanspp(const Matrix& points, int k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  Matrix centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.index(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  std::vector<double> candidate_d2(n);
  std::vector<double> best_d2(n);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    double best_potential = std::numeric_limits<double>::infinity();
    std::size_t best_pick = 0;
    for (int trial = 0; trial < trials; ++trial) {
      std::size_t pick = 0;
      if (total > 0.0) {
        const double r = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > r && d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.index(n);
      }
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate_d2[i] = std::min(d2[i], (points.row(i) - points.row(static_cast<Eigen::Index>(pick))).squaredNorm());
        potential += candidate_d2[i];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best_pick = pick;
        best_d2.swap(candidate_d2);
      }
    }
    centroids.row(c) = points.row(static_cast<Eigen::Index>(best_pick));
    d2.swap(best_d2);
  }
  return centroids;
}

}  // namespace

namespace {

KMeansResult lloyd(const Matrix& points, int k, Rng& rng, const KMeansOptions& options) {
  KMeansResult r;
  r.centroids = kmeanspp(points, k, rng);
  const auto n = static_cast<std::size_t>(points.rows());
  r.assignment.assign(n, 0);
  std::vector<double> dist(n);

  double prev = assign(points, r.centroids, r.assignment, dist);
  r.objective.push_back(prev);
  for (int it = 0; it < options.max_iters; ++it) {
    // Update step.
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(r.assignment[i]) += points.row(static_cast<Eigen::Index>(i));
      ++counts[r.assignment[i]];
    }
    std::vector<char> taken(n, 0);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        r.centroids.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move it onto the worst-served point.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      taken[far] = 1;
      dist[far] = 0.0;
      r.centroids.row(c) = points.row(static_cast<Eigen::Index>(far));
    }
    const double cur = assign(points, r.centroids, r.assignment, dist);
    r.objective.push_back(cur);
    r.iterations = it + 1;
    if (prev <= 0.0 || (prev - cur) / prev < options.tol) break;
    prev = cur;
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 2) throw InvalidInput("k-means needs K >= 2");
  if (points.rows() < k) {
    throw InvalidInput("k-means needs at least K=" + std::to_string(k) + " points, got " +
                       std::to_string(points.rows()));
  }
  if (!points.allFinite()) throw InvalidInput("k-means input contains non-finite values");
  if (options.restarts < 1) throw InvalidInput("k-means needs at least one restart");
  Rng rng(seed);
  KMeansResult best;
  for (int run = 0; run < options.restarts; ++run) {
    auto r = lloyd(points, k, rng, options);
    if (run == 0 || r.objective.back() < best.objective.back()) best = std::move(r);
  }
  return best;
}

Codebook train_codebook(const std::vector<FeatureSequence>& features, int k, std::uint64_t seed,
                        const KMeansOptions& options) {
  if (features.empty()) throw InvalidInput("codebook training needs features");
  const std::string fp = features.front().config.fingerprint();
  Eigen::Index total = 0;
  for (const auto& f : features) {
    if (f.config.fingerprint() != fp) throw InvalidInput("codebook training features use mixed configs");
    if (f.dim() != features.front().dim()) throw InvalidInput("codebook training features differ in width");
    total += f.num_frames();
  }
  if (total < k) {
    throw InvalidInput("codebook training needs at least K=" + std::to_string(k) + " frames, got " +
                       std::to_string(total));
  }
  Matrix points(total, features.front().dim());
  Eigen::Index row = 0;
  for (const auto& f : features) {
    points.middleRows(row, f.num_frames()) = f.frames;
    row += f.num_frames();
  }
  auto r = kmeans(points, k, seed, options);
  // Centroids live on the f32 grid so a saved codebook reloads bit-exactly.
  Matrix c = r.centroids.cast<float>().cast<double>();
  return Codebook(std::move(c), fp);
}

UnitSequence quantize(const FeatureSequence& f, const Codebook& cb) {
  if (f.config.fingerprint() != cb.fingerprint()) {
    throw InvalidInput("feature fingerprint " + f.config.fingerprint() + " does not match codebook " +
                       cb.fingerprint());
  }
  if (f.dim() != cb.dim()) throw InvalidInput("feature width does not match codebook");
  UnitSequence u;
  u.ids.reserve(static_cast<std::size_t>(f.num_frames()));
  for (int t = 0; t < f.num_frames(); ++t) u.ids.push_back(cb.nearest(f.frames.row(t)));
  return u;
}

RunLengthUnits run_length(const UnitSequence& u) {
  if (u.ids.empty()) throw InvalidInput("run_length of an empty unit sequence");
  RunLengthUnits r;
  for (int id : u.ids) {
    if (!r.runs.empty() && r.runs.back().first == id) ++r.runs.back().second;
    else r.runs.emplace_back(id, 1);
  }
  return r;
}

UnitSequence expand(const RunLengthUnits& r) {
  if (r.runs.empty()) throw InvalidInput("expand of empty run-length units");
  UnitSequence u;
  for (const auto& [id, n] : r.runs) {
    if (n < 1) throw InvalidInput("run-length duration must be >= 1");
    u.ids.insert(u.ids.end(), static_cast<std::size_t>(n), id);
  }
  return u;
}

std::string format_id_lists(const std::vector<std::pair<std::string, std::vector<int>>>& rows,
                            const std::string& key) {
  std::string out;
  for (const auto& [id, values] : rows) {
    nlohmann::json j;
    j["id"] = id;
    j[key] = values;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<int>>> parse_id_lists(const std::string& text,
                                                                     const std::string& key) {
  std::vector<std::pair<std::string, std::vector<int>>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      rows.emplace_back(j.at("id").get<std::string>(), j.at(key).get<std::vector<int>>());
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("line " + std::to_string(lineno) + ": bad '" + key + "' record (" + e.what() + ")");
    }
  }
  return rows;
}

}  // namespace unitts
