// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privaudit/data.hpp"

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "privaudit/train.hpp"

namespace privaudit {
namespace {

DataSource blob_source(std::uint64_t seed, int dims = 2, int classes = 2,
                       double separation = 1.0) {
  DataSource p;
  p.dims = dims;
  p.classes = classes;
  p.separation = separation;
  return make_source(SourceKind::kGaussianBlobs, p, seed);
}

DataSource seq_source(std::uint64_t seed, int classes = 3, int len_min = 4,
                      int len_max = 8) {
  DataSource p;
  p.classes = classes;
  p.len_min = len_min;
  p.len_max = len_max;
  p.dominant_prob = 0.75;
  return make_source(SourceKind::kSyntheticSequences, p, seed);
}

bool same_example(const Example& a, const Example& b) {
  return a.label == b.label && a.steps == b.steps && a.tokens == b.tokens;
}

TEST(MakeSource, ValidatesParameters) {
  DataSource p;
  p.classes = 1;
  EXPECT_THROW(make_source(SourceKind::kGaussianBlobs, p, 0), ConfigError);
  p.classes = 2;
  p.dims = 0;
  EXPECT_THROW(make_source(SourceKind::kGaussianBlobs, p, 0), ConfigError);
  p.dims = 2;
  p.classes = 5;  // > 2 * dims, centers would collide
  EXPECT_THROW(make_source(SourceKind::kGaussianBlobs, p, 0), ConfigError);
  EXPECT_NO_THROW(blob_source(0));
  EXPECT_NO_THROW(seq_source(0));
  DataSource q;
  q.classes = 3;
  q.len_min = 5;
  q.len_max = 4;
  EXPECT_THROW(make_source(SourceKind::kSyntheticSequences, q, 0), ConfigError);
}

TEST(Draw, DeterministicInSourceAndKey) {
  const DataSource s = blob_source(42);
  const Dataset a = draw(s, 100, 7);
  const Dataset b = draw(s, 100, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_TRUE(same_example(a[i], b[i]));
}

TEST(Draw, DifferentKeysProduceDifferentData) {
  const DataSource s = blob_source(42);
  const Dataset a = draw(s, 50, 1);
  const Dataset b = draw(s, 50, 2);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size() && !any_diff; ++i)
    any_diff = !same_example(a[i], b[i]);
  EXPECT_TRUE(any_diff);
}

TEST(Draw, PrefixStability) {
  const DataSource s = blob_source(9);
  const Dataset small = draw(s, 10, 3);
  const Dataset big = draw(s, 11, 3);
  for (std::size_t i = 0; i < small.size(); ++i)
    EXPECT_TRUE(same_example(small[i], big[i]));
}

TEST(Draw, BlobClassFrequenciesBalanced) {
  const DataSource s = blob_source(5, 2, 2);
  const Dataset data = draw(s, 10000, 0);
  std::size_t c0 = 0;
  for (const Example& ex : data) c0 += ex.label == 0 ? 1 : 0;
  // Binomial(10^4, 1/2): 3 sigma = 150.
  EXPECT_NEAR(static_cast<double>(c0), 5000.0, 150.0);
}

TEST(Draw, BlobGeometryCentersClasses) {
  const DataSource s = blob_source(5, 2, 4, 1.0);
  const Dataset data = draw(s, 4000, 1);
  // Class means should approximate the configured centers (radius 3).
  std::vector<std::vector<double>> mean(4, std::vector<double>(2, 0.0));
  std::vector<int> count(4, 0);
  for (const Example& ex : data) {
    ++count[ex.label];
    for (int d = 0; d < 2; ++d) mean[ex.label][d] += ex.steps[0][d];
  }
  const double want[4][2] = {{3, 0}, {0, 3}, {-3, 0}, {0, -3}};
  for (int c = 0; c < 4; ++c) {
    ASSERT_GT(count[c], 100);
    for (int d = 0; d < 2; ++d)
      EXPECT_NEAR(mean[c][d] / count[c], want[c][d], 0.2);
  }
}

TEST(Draw, SequenceLabelsAreMajorityTokens) {
  const DataSource s = seq_source(11);
  const Dataset data = draw(s, 500, 2);
  for (const Example& ex : data) {
    ASSERT_GE(ex.tokens.size(), 4u);
    ASSERT_LE(ex.tokens.size(), 8u);
    std::vector<int> counts(3, 0);
    for (int t : ex.tokens) ++counts[t];
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (counts[c] > counts[best]) best = c;
    EXPECT_EQ(ex.label, best);
    // One-hot encoding consistent with tokens.
    ASSERT_EQ(ex.steps.size(), ex.tokens.size());
    for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
      for (int c = 0; c < 3; ++c)
        EXPECT_EQ(ex.steps[t][c], c == ex.tokens[t] ? 1.0 : 0.0);
    }
  }
}

TEST(DrawAdjacentPair, SharesExactlyAllButOneRecord) {
  const DataSource s = blob_source(3);
  for (std::size_t n : {2u, 5u, 32u}) {
    const auto [d1, d2] = draw_adjacent_pair(s, n, 77);
    ASSERT_EQ(d1.size(), n);
    ASSERT_EQ(d2.size(), n);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!same_example(d1[i], d2[i])) ++diff;
    EXPECT_EQ(diff, 1u);
    EXPECT_FALSE(same_example(d1[n - 1], d2[n - 1]));
  }
}

TEST(DrawAdjacentPair, ReplacedRecordIsTheNextDraw) {
  const DataSource s = blob_source(3);
  const std::size_t n = 8;
  const Dataset all = draw(s, n + 1, 123);
  const auto [d1, d2] = draw_adjacent_pair(s, n, 123);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    EXPECT_TRUE(same_example(d1[i], all[i]));
    EXPECT_TRUE(same_example(d2[i], all[i]));
  }
  EXPECT_TRUE(same_example(d1[n - 1], all[n - 1]));
  EXPECT_TRUE(same_example(d2[n - 1], all[n]));
}

TEST(Learnability, SoftmaxRegressionReachesNinetyPercentAtUnitSeparation) {
  const DataSource s = blob_source(2024, 2, 2, 1.0);
  const Dataset train_set = draw(s, 256, 1);
  const Dataset val_set = draw(s, 1000, 2);
  ModelSpec spec;
  spec.kind = ModelKind::kFeedForward;
  spec.layer_dims = {2, 2};
  TrainConfig cfg;
  cfg.mode = TrainMode::kPlain;
  cfg.learning_rate = 0.2;
  cfg.iterations = 1000;
  cfg.minibatch_size = 32;
  cfg.seed = 9;
  const TrainOutcome out = train(spec, cfg, train_set, val_set);
  EXPECT_GE(accuracy(spec, out.params, val_set), 0.90);
}

}  // namespace
}  // namespace privaudit
