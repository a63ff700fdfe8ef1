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

#include "privaudit/accounting.hpp"

#include <cmath>
#include <limits>

#include "gtest/gtest.h"
#include "testing/erf_oracle.hpp"

namespace privaudit {
namespace {

using testing::gaussian_delta_oracle;
using testing::normal_cdf_oracle;

TEST(NormalCdf, MatchesIndependentOracleOnWideRange) {
  // 1e-12 absolute across [-8, 8]; the oracle itself is pinned below.
  double worst = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double x = -8.0 + 16.0 * i / 4000.0;
    worst = std::max(worst, std::abs(normal_cdf(x) - normal_cdf_oracle(x)));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(NormalCdf, OraclePinnedToHighPrecisionValues) {
  // Reference values computed with 30-digit arithmetic.
  EXPECT_NEAR(normal_cdf_oracle(-8.0), 6.22096057427178412e-16, 1e-28);
  EXPECT_NEAR(normal_cdf_oracle(-2.5), 0.00620966532577613517, 1e-15);
  EXPECT_NEAR(normal_cdf_oracle(-0.5), 0.308537538725986896, 1e-15);
  EXPECT_DOUBLE_EQ(normal_cdf_oracle(0.0), 0.5);
  EXPECT_NEAR(normal_cdf_oracle(0.37), 0.644308754800546751, 1e-15);
  EXPECT_NEAR(normal_cdf_oracle(3.25), 0.999422974957609233, 1e-15);
  EXPECT_NEAR(normal_cdf_oracle(8.0), 0.999999999999999378, 1e-15);
}

TEST(GaussianDelta, ZeroSensitivityLeaksNothing) {
  EXPECT_EQ(gaussian_delta(0.0, 0.5), 0.0);
  EXPECT_EQ(gaussian_delta(0.0, 10.0), 0.0);
}

TEST(GaussianDelta, KnownValues) {
  // Phi(0.5) - Phi(-0.5) and Phi(-0.5) - e * Phi(-1.5), both precomputed.
  EXPECT_NEAR(gaussian_delta(1.0, 0.0), 0.382924922548026207, 1e-12);
  EXPECT_NEAR(gaussian_delta(1.0, 1.0), 0.126936737506643946, 1e-12);
  EXPECT_NEAR(gaussian_delta(0.5, 0.25), 0.110298393748528466, 1e-12);
  EXPECT_NEAR(gaussian_delta(2.0, 3.0), 0.183813076544472156, 1e-12);
  EXPECT_NEAR(gaussian_delta(5.0, 10.0), 0.616623730410212374, 1e-12);
  EXPECT_NEAR(gaussian_delta(10.0, 20.0), 0.998029181465427634, 1e-12);
}

TEST(GaussianDelta, MatchesOracleOnGrid) {
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double mu = 0.01 + (10.0 - 0.01) * i / 39.0;
    for (int k = 0; k < 25; ++k) {
      const double eps = 20.0 * k / 24.0;
      worst = std::max(worst, std::abs(gaussian_delta(mu, eps) -
                                       gaussian_delta_oracle(mu, eps)));
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(GaussianDelta, MonotoneInEpsilonAndMu) {
  // Strictly decreasing in epsilon, strictly increasing in mu, sampled on
  // 1000-point grids chosen where delta stays above the underflow floor
  // (delta collapses to exactly 0 in doubles once mu is tiny and epsilon
  // large, so strictness is only meaningful on the representable range).
  const double mu = 1.7;
  double prev = gaussian_delta(mu, 0.0);
  for (int i = 1; i < 1000; ++i) {
    const double eps = 10.0 * i / 999.0;
    const double d = gaussian_delta(mu, eps);
    EXPECT_LT(d, prev) << "eps=" << eps;
    prev = d;
  }
  const double eps = 0.3;
  prev = gaussian_delta(0.1, eps);
  for (int i = 1; i < 1000; ++i) {
    const double m = 0.1 + (10.0 - 0.1) * i / 999.0;
    const double d = gaussian_delta(m, eps);
    EXPECT_GT(d, prev) << "mu=" << m;
    prev = d;
  }
}

TEST(GaussianEpsilon, RoundTripsWithGaussianDelta) {
  for (double mu : {0.01, 0.1, 0.5, 1.0, 2.64, 5.0, 10.0}) {
    for (double eps : {0.1, 0.5, 1.0, 3.0, 10.0, 20.0}) {
      const double delta = gaussian_delta(mu, eps);
      if (delta <= 0.0 || delta >= 1.0) continue;
      const double back = gaussian_epsilon(mu, delta);
      EXPECT_NEAR(back, eps, 1e-6) << "mu=" << mu << " eps=" << eps;
    }
  }
}

TEST(GaussianEpsilon, AlreadySatisfiedTargetGivesZero) {
  // delta at eps=0 for mu=1 is ~0.383 < 0.5.
  EXPECT_EQ(gaussian_epsilon(1.0, 0.5), 0.0);
}

TEST(GaussianEpsilon, BisectionSelfConsistent) {
  const double eps = gaussian_epsilon(2.0, 1e-4);
  const double d = gaussian_delta(2.0, eps);
  EXPECT_LE(d, 1e-4);
  EXPECT_GE(d, 1e-4 - 1e-9);
}

TEST(GaussianEpsilon, VacuousPrivacyReportsInfinity) {
  // mu enormous: no epsilon below the cap can reach a tiny delta.
  EXPECT_TRUE(std::isinf(gaussian_epsilon(1e6, 1e-9)));
}

TEST(LambertW, BranchPoint) {
  EXPECT_NEAR(lambert_w_minus1(-std::exp(-1.0)), -1.0, 1e-8);
}

TEST(LambertW, KnownValues) {
  EXPECT_NEAR(lambert_w_minus1(-0.1), -3.5771520639572972, 1e-10);
  EXPECT_NEAR(lambert_w_minus1(-5e-4), -9.8926995227042541, 1e-9);
}

TEST(LambertW, DefiningEquationResidualOnLogSpacedGrid) {
  // |w e^w - x| <= 1e-12 |x| on 1000 log-spaced points.
  for (int i = 0; i < 1000; ++i) {
    const double t = static_cast<double>(i) / 999.0;
    const double x = -std::exp(-1.0 + t * (std::log(1e-15) + 1.0));
    const double w = lambert_w_minus1(x);
    EXPECT_LE(w, -1.0) << "x=" << x;
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12 * std::abs(x)) << "x=" << x;
  }
}

TEST(LambertW, DomainErrors) {
  EXPECT_THROW(lambert_w_minus1(0.0), DomainError);
  EXPECT_THROW(lambert_w_minus1(0.5), DomainError);
  EXPECT_THROW(lambert_w_minus1(-0.5), DomainError);  // below -1/e
}

TEST(RdpConfidence, PaperConfidenceAtFiveHundredSamples) {
  // n = 500 gives gamma just under 0.08.
  const RdpConfidence c = rdp_confidence(500);
  EXPECT_GT(c.gamma, 0.0770);
  EXPECT_LT(c.gamma, 0.0800);
  EXPECT_NEAR(c.rho, 0.00710931231008300550, 1e-10);
  // rho round-trips through the defining equation of W_{-1}(-1/(4n)).
  const double w = 2.0 * std::log(c.rho);
  EXPECT_NEAR(w * std::exp(w), -1.0 / 2000.0, 1e-15);
}

TEST(RdpConfidence, MoreSamplesTightenConfidence) {
  EXPECT_LT(rdp_confidence(5000).gamma, rdp_confidence(500).gamma);
}

TEST(RdpConfidence, BothComponentsInUnitIntervalFromTwoSamples) {
  // The printed formula gives gamma slightly above 1 at n = 1 (a vacuous
  // confidence bound); from n = 2 on both components live in (0, 1).
  for (std::int64_t n : {2, 10, 500, 100000}) {
    const RdpConfidence c = rdp_confidence(n);
    EXPECT_GT(c.rho, 0.0);
    EXPECT_LT(c.rho, 1.0);
    EXPECT_GT(c.gamma, 0.0);
    EXPECT_LT(c.gamma, 1.0);
  }
  EXPECT_GT(rdp_confidence(1).gamma, 1.0);  // formula as printed
}

TEST(SensitivityBound, ZeroIterations) {
  EXPECT_EQ(sensitivity_bound(0.1, 1.0, 0, 2, 1.0), 0.0);
}

TEST(SensitivityBound, HandValues) {
  EXPECT_NEAR(sensitivity_bound(0.1, 1.0, 1, 2, 1.0), 0.2, 1e-15);
  // 2 * (1.2^3 - 1) * 0.5 / (4 * 2)
  EXPECT_NEAR(sensitivity_bound(0.1, 2.0, 3, 5, 0.5), 0.091, 1e-12);
}

TEST(SensitivityBound, SingletonMinibatchRejected) {
  EXPECT_THROW(sensitivity_bound(0.1, 1.0, 5, 1, 1.0), DomainError);
}

TEST(Compose, LinearComposition) {
  const PrivacyBudget b = compose(3, {1.0, 1e-5});
  EXPECT_DOUBLE_EQ(b.epsilon, 3.0);
  EXPECT_DOUBLE_EQ(b.delta, 3e-5);
}

TEST(Compose, IdentityAtOne) {
  const PrivacyBudget b = compose(1, {0.7, 1e-3});
  EXPECT_DOUBLE_EQ(b.epsilon, 0.7);
  EXPECT_DOUBLE_EQ(b.delta, 1e-3);
}

TEST(Compose, DeltaClampsAtOne) {
  const PrivacyBudget b = compose(1000000, {0.1, 1e-2});
  EXPECT_DOUBLE_EQ(b.epsilon, 1e5);
  EXPECT_DOUBLE_EQ(b.delta, 1.0);
}

TEST(Certificate, ValidatesConsistentFields) {
  RandomDpCertificate cert;
  cert.n = 500;
  cert.s_bar = 0.0132;
  cert.sigma = 0.005;
  cert.mu = cert.s_bar / cert.sigma;
  cert.delta = 1e-4;
  cert.epsilon = gaussian_epsilon(cert.mu, cert.delta);
  cert.gamma = rdp_confidence(cert.n).gamma;
  EXPECT_NO_THROW(cert.validate());
  cert.gamma += 0.01;
  EXPECT_THROW(cert.validate(), InvariantError);
}

}  // namespace
}  // namespace privaudit
