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

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "test_util.hpp"
#include "unitts/units.hpp"

namespace unitts {
namespace {

FeatureSequence features_of(const Matrix& m) {
  FeatureSequence f;
  f.frames = m;
  f.config.n_bands = static_cast<int>(m.cols());
  return f;
}

Codebook codebook_of(const Matrix& c) {
  FeatureConfig cfg;
  cfg.n_bands = static_cast<int>(c.cols());
  return Codebook(c, cfg.fingerprint());
}

// Minimum within-cluster SSE over every assignment of points to k labels.
double brute_force_sse(const Matrix& pts, int k) {
  const int n = static_cast<int>(pts.rows());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> label(n, 0);
  while (true) {
    double sse = 0.0;
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(pts.cols());
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (label[i] == c) {
          sum += pts.row(i);
          ++count;
        }
      }
      if (count == 0) continue;
      const Eigen::RowVectorXd mean = sum / count;
      for (int i = 0; i < n; ++i) {
        if (label[i] == c) sse += (pts.row(i) - mean).squaredNorm();
      }
    }
    best = std::min(best, sse);
    int pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

double sse(const Matrix& pts, const Matrix& centroids, const std::vector<int>& assignment) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) s += (pts.row(i) - centroids.row(assignment[i])).squaredNorm();
  return s;
}

TEST(KMeans, FourPointExample) {
  Matrix pts(4, 2);
  pts << 0, 0, 0, 1, 10, 0, 10, 1;
  const auto r = kmeans(pts, 2, 3);
  EXPECT_NEAR(sse(pts, r.centroids, r.assignment), brute_force_sse(pts, 2), 1e-12);
  std::vector<std::pair<double, double>> c = {{r.centroids(0, 0), r.centroids(0, 1)},
                                              {r.centroids(1, 0), r.centroids(1, 1)}};
  std::sort(c.begin(), c.end());
  EXPECT_EQ(c[0], std::make_pair(0.0, 0.5));
  EXPECT_EQ(c[1], std::make_pair(10.0, 0.5));
}

TEST(KMeans, MatchesBruteForceOnSmallInstances) {
  Rng rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 4 + static_cast<int>(rng.index(4));
    const int k = 2 + static_cast<int>(rng.index(2));
    Matrix pts = testing::random_matrix(n, 2, rng);
    // Well separated groups so Lloyd's local optimum is the global one.
    for (int i = 0; i < n; ++i) pts(i, 0) += 20.0 * (i % k);
    KMeansOptions opts;
    opts.restarts = 5;
    const auto r = kmeans(pts, k, static_cast<std::uint64_t>(trial), opts);
    EXPECT_NEAR(sse(pts, r.centroids, r.assignment), brute_force_sse(pts, k), 1e-9) << "trial " << trial;
  }
}

TEST(KMeans, DistinctPointsGiveZeroObjective) {
  Matrix pts(3, 2);
  pts << 1, 2, 5, 5, -3, 0;
  const auto r = kmeans(pts, 3, 1);
  EXPECT_EQ(r.objective.back(), 0.0);
  std::vector<int> a = r.assignment;
  std::sort(a.begin(), a.end());
  EXPECT_EQ(a, (std::vector<int>{0, 1, 2}));
}

TEST(KMeans, ObjectiveNonIncreasing) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix pts = testing::random_matrix(200, 3, rng);
    const auto r = kmeans(pts, 8, static_cast<std::uint64_t>(trial));
    ASSERT_FALSE(r.objective.empty());
    for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-9);
  }
}

TEST(KMeans, DuplicatePointsHandleEmptyClusters) {
  Matrix pts(6, 1);
  pts << 0, 0, 0, 0, 0, 7;
  const auto r = kmeans(pts, 3, 2);
  EXPECT_TRUE(r.centroids.allFinite());
  EXPECT_EQ(r.objective.back(), 0.0);
}

TEST(KMeans, Errors) {
  EXPECT_THROW(kmeans(Matrix::Zero(3, 2), 4, 0), InvalidInput);
  EXPECT_THROW(kmeans(Matrix::Zero(3, 2), 1, 0), InvalidInput);
  Matrix bad = Matrix::Zero(3, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(kmeans(bad, 2, 0), InvalidInput);
}

TEST(TrainCodebook, DeterministicAndFrameCountChecked) {
  Rng rng(14);
  std::vector<FeatureSequence> feats = {features_of(testing::random_matrix(50, 4, rng)),
                                        features_of(testing::random_matrix(30, 4, rng))};
  const Codebook a = train_codebook(feats, 5, 77);
  const Codebook b = train_codebook(feats, 5, 77);
  EXPECT_EQ(a.centroids(), b.centroids());
  EXPECT_EQ(a.fingerprint(), feats[0].config.fingerprint());
  std::vector<FeatureSequence> tiny = {features_of(testing::random_matrix(3, 4, rng))};
  EXPECT_THROW(train_codebook(tiny, 5, 1), InvalidInput);
}

TEST(Quantize, Examples) {
  Matrix c(2, 2);
  c << 0, 0, 10, 10;
  const Codebook cb = codebook_of(c);
  Matrix f(4, 2);
  f << 1, 1, 5, 5, 9, 9, 0, 1;
  EXPECT_EQ(quantize(features_of(f), cb).ids, (std::vector<int>{0, 0, 1, 0}));
}

TEST(Quantize, FingerprintMismatch) {
  Matrix c(2, 2);
  c << 0, 0, 10, 10;
  const Codebook cb(c, "deadbeef");
  EXPECT_THROW(quantize(features_of(Matrix::Zero(3, 2)), cb), InvalidInput);
}

TEST(Quantize, PermutationEquivariant) {
  Rng rng(15);
  const Matrix c = testing::random_matrix(6, 3, rng);
  const FeatureSequence f = features_of(testing::random_matrix(100, 3, rng));
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 5; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
  Matrix permuted(6, 3);
  for (int i = 0; i < 6; ++i) permuted.row(perm[i]) = c.row(i);
  const auto a = quantize(f, codebook_of(c));
  const auto b = quantize(f, codebook_of(permuted));
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(b.ids[t], perm[a.ids[t]]);
}

TEST(Codebook, SaveLoadRoundTrip) {
  Rng rng(16);
  const Matrix c = testing::random_matrix(4, 3, rng).cast<float>().cast<double>();
  const Codebook cb(c, "abc123");
  std::stringstream ss;
  cb.save(ss);
  EXPECT_EQ(ss.str().substr(0, 4), "UCBK");
  const Codebook back = Codebook::load(ss);
  EXPECT_EQ(back.centroids(), c);
  EXPECT_EQ(back.fingerprint(), "abc123");
  EXPECT_THROW(Codebook(Matrix::Zero(1, 3), "x"), InvalidInput);
  std::stringstream bad("UCBX");
  EXPECT_THROW(Codebook::load(bad), InvalidInput);
}

TEST(RunLength, Examples) {
  EXPECT_EQ(run_length({{5, 5, 5, 2, 2, 9}}).runs, (std::vector<std::pair<int, int>>{{5, 3}, {2, 2}, {9, 1}}));
  EXPECT_EQ(run_length({{7, 7}}).runs, (std::vector<std::pair<int, int>>{{7, 2}}));
  EXPECT_THROW(run_length({}), InvalidInput);
  EXPECT_THROW(expand({{{1, 0}}}), InvalidInput);
}

TEST(RunLength, RoundTripProperty) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    UnitSequence u;
    const int n = 1 + static_cast<int>(rng.index(30));
    for (int i = 0; i < n; ++i) u.ids.push_back(static_cast<int>(rng.index(4)));
    const auto r = run_length(u);
    EXPECT_EQ(expand(r), u);
    int total = 0;
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
      EXPECT_GE(r.runs[i].second, 1);
      if (i > 0) EXPECT_NE(r.runs[i].first, r.runs[i - 1].first);
      total += r.runs[i].second;
    }
    EXPECT_EQ(total, n);
  }
}

TEST(IdLists, FormatParseRoundTrip) {
  const std::vector<std::pair<std::string, std::vector<int>>> rows = {{"a", {1, 2, 3}}, {"b", {0}}};
  const std::string text = format_id_lists(rows, "units");
  EXPECT_EQ(parse_id_lists(text, "units"), rows);
  EXPECT_THROW(parse_id_lists(text, "durations"), InvalidInput);
}

}  // namespace
}  // namespace unitts
