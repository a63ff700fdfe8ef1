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

#include "privaudit/nn.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "privaudit/rng.hpp"

namespace privaudit {
namespace {

Example vec_example(std::vector<double> features, int label) {
  Example ex;
  ex.steps.push_back(std::move(features));
  ex.label = label;
  return ex;
}

ModelSpec mlp(std::vector<int> dims, Activation act = Activation::kTanh) {
  ModelSpec spec;
  spec.kind = ModelKind::kFeedForward;
  spec.layer_dims = std::move(dims);
  spec.hidden_activation = act;
  return spec;
}

ModelSpec rnn(int input, int hidden, int classes) {
  ModelSpec spec;
  spec.kind = ModelKind::kRecurrent;
  spec.input_dim = input;
  spec.hidden_dim = hidden;
  spec.num_classes = classes;
  return spec;
}

ParamVector random_params(const ModelSpec& spec, std::uint64_t seed,
                          double scale = 0.8) {
  ParamVector p(spec.param_count());
  rng::Stream st(seed);
  for (double& v : p.values) v = st.uniform_range(-scale, scale);
  return p;
}

// Central finite differences of the mean batch loss; the independent oracle
// the backward pass is checked against.
ParamVector finite_difference_grad(const ModelSpec& spec, const ParamVector& params,
                                   const Dataset& batch, double h = 1e-5) {
  ParamVector g(params.size());
  ParamVector work = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    work[i] = params[i] + h;
    const double up = loss(spec, work, batch);
    work[i] = params[i] - h;
    const double down = loss(spec, work, batch);
    work[i] = params[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const ParamVector& a, const ParamVector& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
}

TEST(ParamCount, ClosedForm) {
  EXPECT_EQ(mlp({3, 5, 4}).param_count(), 3u * 5 + 5 + 5u * 4 + 4);
  EXPECT_EQ(mlp({2, 2}).param_count(), 2u * 2 + 2);
  EXPECT_EQ(rnn(3, 4, 2).param_count(), 4u * 3 + 4u * 4 + 4 + 2u * 4 + 2);
}

TEST(ModelSpec, Validation) {
  EXPECT_THROW(mlp({4}).validate(), ConfigError);
  EXPECT_THROW(mlp({4, 1}).validate(), ConfigError);  // m >= 2
  EXPECT_NO_THROW(mlp({4, 2}).validate());
  EXPECT_THROW(rnn(0, 3, 2).validate(), ConfigError);
  EXPECT_THROW(rnn(2, 3, 1).validate(), ConfigError);
}

TEST(Forward, ZeroParamsGiveUniformConfidence) {
  const ModelSpec spec = mlp({3, 4});
  const ParamVector zeros(spec.param_count());
  const ConfidenceVector p = forward(spec, zeros, vec_example({0.3, -1.0, 2.0}, 0));
  ASSERT_EQ(p.size(), 4u);
  for (double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, SoftmaxClosedForm) {
  // No hidden layer, zero weights, bias (0, ln 3): softmax = (1/4, 3/4).
  const ModelSpec spec = mlp({2, 2});
  ParamVector params(spec.param_count());
  params[4] = 0.0;
  params[5] = std::log(3.0);
  const ConfidenceVector p = forward(spec, params, vec_example({7.0, -2.0}, 0));
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
}

TEST(Forward, RecurrentSingleStepEqualsManualCellReadout) {
  const ModelSpec spec = rnn(2, 3, 2);
  const ParamVector params = random_params(spec, 7);
  Example ex;
  ex.steps.push_back({0.4, -0.9});
  ex.label = 0;
  const ConfidenceVector p = forward(spec, params, ex);

  // Manual single-step unrolling: h = tanh(Wxh x + bh), logits = Why h + by.
  const int hd = 3, id = 2, m = 2;
  std::vector<double> h(hd);
  for (int j = 0; j < hd; ++j) {
    double v = params[hd * id + hd * hd + j];  // bh
    for (int i = 0; i < id; ++i) v += params[j * id + i] * ex.steps[0][i];
    h[j] = std::tanh(v);
  }
  std::vector<double> logits(m);
  const std::size_t o_why = hd * id + hd * hd + hd;
  for (int r = 0; r < m; ++r) {
    double v = params[o_why + m * hd + r];  // by
    for (int j = 0; j < hd; ++j) v += params[o_why + r * hd + j] * h[j];
    logits[r] = v;
  }
  const double mx = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - mx), e1 = std::exp(logits[1] - mx);
  EXPECT_NEAR(p[0], e0 / (e0 + e1), 1e-12);
  EXPECT_NEAR(p[1], e1 / (e0 + e1), 1e-12);
}

TEST(Forward, ConfidenceInvariantsOnRandomModels) {
  rng::Stream st(99);
  for (int trial = 0; trial < 50; ++trial) {
    const bool recurrent = trial % 2 == 1;
    const ModelSpec spec = recurrent ? rnn(3, 4, 3) : mlp({3, 6, 3});
    const ParamVector params = random_params(spec, 1000 + trial, 1.5);
    Example ex;
    const int steps = recurrent ? 1 + static_cast<int>(st.below(6)) : 1;
    for (int s = 0; s < steps; ++s) {
      std::vector<double> f(3);
      for (double& v : f) v = st.uniform_range(-2.0, 2.0);
      ex.steps.push_back(std::move(f));
    }
    ex.label = 0;
    const ConfidenceVector p = forward(spec, params, ex);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_NO_THROW(validate_confidence(p));
    EXPECT_LE(entropy_of(p), std::log(3.0) + 1e-12);
  }
}

TEST(Forward, ShapeErrors) {
  const ModelSpec spec = mlp({3, 2});
  const ParamVector params(spec.param_count());
  EXPECT_THROW(forward(spec, params, vec_example({1.0, 2.0}, 0)), ShapeError);
  Example empty_seq;
  empty_seq.label = 0;
  const ModelSpec rspec = rnn(2, 3, 2);
  EXPECT_THROW(forward(rspec, ParamVector(rspec.param_count()), empty_seq),
               ShapeError);
  EXPECT_THROW(forward(spec, ParamVector(3), vec_example({1, 2, 3}, 0)),
               ShapeError);
}

TEST(Forward, NonFiniteActivationRaisesNumericError) {
  const ModelSpec spec = mlp({2, 2});
  ParamVector params(spec.param_count());
  params[0] = 1e308;
  EXPECT_THROW(forward(spec, params, vec_example({1e308, 0.0}, 0)), NumericError);
}

TEST(Forward, Deterministic) {
  const ModelSpec spec = rnn(2, 5, 3);
  const ParamVector params = random_params(spec, 21);
  Example ex;
  ex.steps = {{0.2, 0.4}, {-1.0, 0.7}, {0.0, 0.1}};
  ex.label = 1;
  const ConfidenceVector a = forward(spec, params, ex);
  const ConfidenceVector b = forward(spec, params, ex);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a[i], b[i]);  // bitwise
}

TEST(ForwardSteps, PerStepReadoutsMatchPrefixForwards) {
  const ModelSpec spec = rnn(2, 4, 3);
  const ParamVector params = random_params(spec, 5);
  Example ex;
  ex.steps = {{0.5, -0.5}, {1.0, 0.0}, {-0.3, 0.9}};
  ex.label = 0;
  const std::vector<ConfidenceVector> steps = forward_steps(spec, params, ex);
  ASSERT_EQ(steps.size(), 3u);
  for (std::size_t len = 1; len <= 3; ++len) {
    Example prefix;
    prefix.steps.assign(ex.steps.begin(),
                        ex.steps.begin() + static_cast<std::ptrdiff_t>(len));
    prefix.label = 0;
    const ConfidenceVector p = forward(spec, params, prefix);
    for (std::size_t j = 0; j < p.size(); ++j)
      EXPECT_DOUBLE_EQ(steps[len - 1][j], p[j]);
  }
}

TEST(Loss, PerfectConfidenceGivesZero) {
  const ModelSpec spec = mlp({2, 2});
  ParamVector params(spec.param_count());
  params[4] = 200.0;  // bias towards class 0; softmax saturates to (1, 0)
  const Dataset batch{vec_example({0.0, 0.0}, 0)};
  EXPECT_NEAR(loss(spec, params, batch), 0.0, 1e-12);
}

TEST(Loss, UniformPredictionTenClasses) {
  const ModelSpec spec = mlp({3, 10});
  const ParamVector zeros(spec.param_count());
  const Dataset batch{vec_example({1.0, 2.0, 3.0}, 7)};
  EXPECT_NEAR(loss(spec, zeros, batch), std::log(10.0), 1e-12);
}

TEST(Loss, HandComputedTwoExampleMean) {
  // p_label = 0.5 and 0.25: (ln 2 + ln 4) / 2.
  const ModelSpec spec = mlp({1, 2});
  ParamVector a(spec.param_count());
  a[2] = std::log(1.0);  // logits (0, 0) -> p = (1/2, 1/2)
  ParamVector b(spec.param_count());
  b[3] = std::log(3.0);  // logits (0, ln 3) -> p = (1/4, 3/4)
  const Dataset ba{vec_example({0.0}, 0)};
  const double la = loss(spec, a, ba);
  const double lb = loss(spec, b, ba);
  EXPECT_NEAR((la + lb) / 2.0, 1.03972077083991796, 1e-12);
}

TEST(Loss, FlooredAtTinyProbability) {
  const ModelSpec spec = mlp({1, 2});
  ParamVector params(spec.param_count());
  params[3] = 800.0;  // p(label 0) underflows to exactly 0
  const Dataset batch{vec_example({0.0}, 0)};
  const double l = loss(spec, params, batch);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_NEAR(l, -std::log(1e-12), 1e-9);
}

TEST(Grad, SoftmaxRegressionClosedForm) {
  // Zero params, one example: d loss/d logits = p - onehot = (1/m...) - e_y;
  // weight gradient is the outer product with the input.
  const ModelSpec spec = mlp({2, 3});
  const ParamVector zeros(spec.param_count());
  const Dataset batch{vec_example({0.5, -1.5}, 1)};
  const ParamVector g = grad(spec, zeros, batch);
  const double third = 1.0 / 3.0;
  const std::vector<double> dlogits = {third, third - 1.0, third};
  for (int r = 0; r < 3; ++r) {
    EXPECT_NEAR(g[r * 2 + 0], dlogits[r] * 0.5, 1e-12);
    EXPECT_NEAR(g[r * 2 + 1], dlogits[r] * -1.5, 1e-12);
    EXPECT_NEAR(g[6 + r], dlogits[r], 1e-12);
  }
}

TEST(Grad, DuplicatedBatchEqualsSingleExample) {
  const ModelSpec spec = mlp({2, 4, 3});
  const ParamVector params = random_params(spec, 3);
  const Example ex = vec_example({0.3, 0.8}, 2);
  const ParamVector single = grad(spec, params, Dataset{ex});
  const ParamVector twice = grad(spec, params, Dataset{ex, ex});
  for (std::size_t i = 0; i < single.size(); ++i)
    EXPECT_NEAR(twice[i], single[i], 1e-15);
}

TEST(Grad, MatchesFiniteDifferencesOnRandomInstances) {
  // 100 random instances, feed-forward and recurrent, sequence lengths 1-8,
  // relative error < 1e-4 against central differences.
  rng::Stream st(424242);
  int done = 0;
  for (int trial = 0; done < 100; ++trial) {
    const bool recurrent = trial % 2 == 1;
    ModelSpec spec;
    if (recurrent) {
      spec = rnn(2 + static_cast<int>(st.below(2)),
                 2 + static_cast<int>(st.below(3)),
                 2 + static_cast<int>(st.below(2)));
    } else {
      std::vector<int> dims{2 + static_cast<int>(st.below(3))};
      const int hidden_layers = static_cast<int>(st.below(3));
      for (int l = 0; l < hidden_layers; ++l)
        dims.push_back(2 + static_cast<int>(st.below(4)));
      dims.push_back(2 + static_cast<int>(st.below(3)));
      spec = mlp(std::move(dims),
                 st.uniform() < 0.5 ? Activation::kTanh : Activation::kRelu);
    }
    const ParamVector params = random_params(spec, 5000 + trial, 0.7);
    Dataset batch;
    const int bs = 1 + static_cast<int>(st.below(3));
    for (int b = 0; b < bs; ++b) {
      Example ex;
      const int steps = recurrent ? 1 + static_cast<int>(st.below(8)) : 1;
      for (int s = 0; s < steps; ++s) {
        std::vector<double> f(static_cast<std::size_t>(spec.input_size()));
        for (double& v : f) v = st.uniform_range(-1.5, 1.5);
        ex.steps.push_back(std::move(f));
      }
      ex.label = static_cast<int>(st.below(static_cast<std::uint64_t>(spec.classes())));
      batch.push_back(std::move(ex));
    }
    const ParamVector analytic = grad(spec, params, batch);
    const ParamVector numeric = finite_difference_grad(spec, params, batch);
    EXPECT_LT(relative_error(analytic, numeric), 1e-4)
        << "trial=" << trial << " recurrent=" << recurrent;
    ++done;
  }
}

TEST(Grad, ActivationPenaltyMatchesFiniteDifferencesOfPenalizedLoss) {
  const ModelSpec spec = mlp({2, 4, 3});
  const ParamVector params = random_params(spec, 11);
  const Dataset batch{vec_example({0.7, -0.2}, 1)};
  const double lambda = 0.3;
  GradOptions opts;
  opts.activation_l2 = lambda;
  const ParamVector analytic = grad(spec, params, batch, opts);

  // Finite differences of loss + lambda/2 * ||hidden activations||^2.
  auto penalized = [&](const ParamVector& at) {
    double base = loss(spec, at, batch);
    // recompute hidden activations by hand (single hidden layer)
    const auto& x = batch[0].steps[0];
    double pen = 0.0;
    for (int r = 0; r < 4; ++r) {
      double z = at[4 * 2 + r];
      for (int c = 0; c < 2; ++c) z += at[r * 2 + c] * x[c];
      const double a = std::tanh(z);
      pen += a * a;
    }
    return base + 0.5 * lambda * pen;
  };
  ParamVector work = params;
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    work[i] = params[i] + h;
    const double up = penalized(work);
    work[i] = params[i] - h;
    const double down = penalized(work);
    work[i] = params[i];
    EXPECT_NEAR(analytic[i], (up - down) / (2.0 * h), 1e-5) << "i=" << i;
  }
}

TEST(PredictionEntropy, OneHotBatchesHaveZeroEntropy) {
  PredictionBatch batch;
  batch.push_back({0, {1.0, 0.0, 0.0}});
  batch.push_back({2, {0.0, 0.0, 1.0}});
  EXPECT_DOUBLE_EQ(prediction_entropy(batch), 0.0);
}

TEST(PredictionEntropy, UniformSingleVector) {
  PredictionBatch batch{{1, {0.25, 0.25, 0.25, 0.25}}};
  EXPECT_NEAR(prediction_entropy(batch), std::log(4.0), 1e-12);
}

TEST(PredictionEntropy, MixedHandValue) {
  PredictionBatch batch;
  batch.push_back({0, {1.0, 0.0}});
  batch.push_back({0, {0.5, 0.5}});
  EXPECT_NEAR(prediction_entropy(batch), std::log(2.0) / 2.0, 1e-12);
}

TEST(PredictionEntropy, RejectsInvalidConfidences) {
  PredictionBatch bad{{0, {0.7, 0.7}}};
  EXPECT_THROW(prediction_entropy(bad), InvariantError);
  PredictionBatch empty;
  EXPECT_THROW(prediction_entropy(empty), InvariantError);
  PredictionBatch bad_outcome{{5, {0.5, 0.5}}};
  EXPECT_THROW(prediction_entropy(bad_outcome), InvariantError);
}

TEST(PredictionEntropy, BoundedByLogM) {
  rng::Stream st(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(st.below(6));
    PredictionBatch batch;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> p(static_cast<std::size_t>(m));
      double sum = 0.0;
      for (double& v : p) {
        v = -std::log(st.uniform_open());
        sum += v;
      }
      for (double& v : p) v /= sum;
      batch.push_back({0, std::move(p)});
    }
    const double h = prediction_entropy(batch);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(static_cast<double>(m)) + 1e-9);
  }
}

}  // namespace
}  // namespace privaudit
