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

#include <limits>

#include "test_util.hpp"
#include "unitts/aligner.hpp"
#include "unitts/corpus.hpp"
#include "unitts/text_frontend.hpp"

namespace unitts {
namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Within-span SSE computed directly, without prefix sums.
double direct_cost(const Matrix& frames, const std::vector<int>& d) {
  double cost = 0.0;
  Eigen::Index start = 0;
  for (int len : d) {
    const Matrix span = frames.middleRows(start, len);
    const Eigen::RowVectorXd mean = span.colwise().mean();
    cost += (span.rowwise() - mean).squaredNorm();
    start += len;
  }
  return cost;
}

// Every composition of t into n positive parts, in lexicographic order of
// boundaries.
void compositions(int t, int n, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (n == 1) {
    cur.push_back(t);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int first = 1; first <= t - (n - 1); ++first) {
    cur.push_back(first);
    compositions(t - first, n - 1, cur, out);
    cur.pop_back();
  }
}

TEST(Align, StepExample) {
  const Matrix f = column({0, 0, 0, 5, 5});
  const auto d = align(f, 2);
  EXPECT_EQ(d.frames, (std::vector<int>{3, 2}));
  EXPECT_EQ(segmentation_cost(f, d.frames), 0.0);
}

TEST(Align, TieRuleEarliestBoundary) {
  EXPECT_EQ(align(column({0, 0, 0, 0}), 2).frames, (std::vector<int>{1, 3}));
}

TEST(Align, OneFramePerTokenWhenForced) {
  Rng rng(1);
  const Matrix f = testing::random_matrix(6, 3, rng);
  EXPECT_EQ(align(f, 6).frames, std::vector<int>(6, 1));
  EXPECT_EQ(align(f, 1).frames, std::vector<int>{6});
}

TEST(Align, Errors) {
  EXPECT_THROW(align(Matrix::Zero(3, 2), 4), InvalidInput);
  EXPECT_THROW(align(Matrix::Zero(3, 2), 0), InvalidInput);
}

TEST(Align, MatchesBruteForce) {
  Rng rng(2);
  int instances = 0;
  for (int t = 1; t <= 10; ++t) {
    for (int n = 1; n <= std::min(4, t); ++n) {
      for (int trial = 0; trial < 8; ++trial) {
        Matrix f = testing::random_matrix(t, 2, rng);
        // Some instances with ties: coarse integer-valued frames.
        if (trial % 2 == 1) f = f.array().round();
        std::vector<std::vector<int>> all;
        std::vector<int> cur;
        compositions(t, n, cur, all);
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_d;
        for (const auto& d : all) {
          const double c = direct_cost(f, d);
          if (c < best - 1e-12) {
            best = c;
            best_d = d;
          }
        }
        const auto got = align(f, n);
        EXPECT_NEAR(direct_cost(f, got.frames), best, 1e-9) << "T=" << t << " N=" << n;
        if (trial % 2 == 0) EXPECT_EQ(got.frames, best_d) << "T=" << t << " N=" << n;
        ++instances;
      }
    }
  }
  EXPECT_GT(instances, 200);
}

TEST(Align, ContiguousPartition) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int t = 5 + static_cast<int>(rng.index(40));
    const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(t)));
    const auto d = align(testing::random_matrix(t, 3, rng), n);
    ASSERT_EQ(d.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(d.total(), t);
    for (int x : d.frames) EXPECT_GE(x, 1);
  }
}

TEST(Align, ScaleInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix f = testing::random_matrix(20, 3, rng);
    const int n = 2 + static_cast<int>(rng.index(6));
    EXPECT_EQ(align(f, n), align(Matrix(f * 3.5), n));
  }
}

TEST(Align, SegmentationCostMatchesDirect) {
  Rng rng(5);
  const Matrix f = testing::random_matrix(9, 2, rng);
  const std::vector<int> d = {2, 4, 3};
  EXPECT_NEAR(segmentation_cost(f, d), direct_cost(f, d), 1e-12);
}

TEST(AlignCorpus, SkipsTooManyTokens) {
  Rng rng(6);
  std::vector<Utterance> utts;
  std::vector<FeatureSequence> feats;
  std::vector<TokenSequence> toks;
  for (int i = 0; i < 3; ++i) {
    utts.push_back({"u" + std::to_string(i), "x.wav", "abc", "L1", "s"});
    FeatureSequence f;
    f.frames = testing::random_matrix(i == 1 ? 2 : 8, 2, rng);
    feats.push_back(f);
    toks.push_back({{2, 3, 4}, "L1"});
  }
  const auto batch = align_corpus(utts, feats, toks);
  EXPECT_EQ(batch.durations.size(), 2u);
  ASSERT_EQ(batch.skipped.size(), 1u);
  EXPECT_EQ(batch.skipped[0].rfind("u1:", 0), 0u);
  for (const auto& [id, d] : batch.durations) EXPECT_EQ(d.total(), 8);
  EXPECT_THROW(align_corpus(utts, feats, {}), InvalidInput);
}

TEST(DurationSequence, Validate) {
  EXPECT_NO_THROW((DurationSequence{{1, 2}}).validate());
  EXPECT_THROW((DurationSequence{{1, 0}}).validate(), InvalidInput);
  EXPECT_THROW((DurationSequence{{}}).validate(), InvalidInput);
  EXPECT_EQ((DurationSequence{{1, 2, 3}}).total(), 6);
}

}  // namespace
}  // namespace unitts
