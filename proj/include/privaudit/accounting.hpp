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
//
// Closed-form privacy arithmetic for the Gaussian mechanism.
//
// The central quantity is the exact delta of a Gaussian mechanism with
// noise-to-sensitivity ratio mu = S/sigma at privacy level epsilon:
//
//     delta(mu, eps) = Phi(-eps/mu + mu/2) - e^eps * Phi(-eps/mu - mu/2)
//
// with Phi the standard normal CDF. delta is strictly decreasing in eps and
// strictly increasing in mu, so the inverse (smallest eps at a target delta)
// is computed by bisection. Phi is evaluated through erfc, whose standard
// implementation keeps the absolute error below 1e-15 across the range we
// use; the test suite pins this against an independent series/continued-
// fraction oracle.
//
// Random-DP confidence for an n-sample empirical sensitivity estimate uses
// the lower real branch of the Lambert W function:
//
//     rho   = exp(W_{-1}(-1/(4n)) / 2)
//     gamma = rho + sqrt(ln(1/rho) / (2n))
//
// Sequential releases compose linearly: k uses of an (eps, delta) mechanism
// give (k*eps, min(1, k*delta)). DP-SGD budgets reported through this module
// are naive-composition upper bounds, not moments-accountant values.

#ifndef PRIVAUDIT_ACCOUNTING_HPP
#define PRIVAUDIT_ACCOUNTING_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "privaudit/error.hpp"

namespace privaudit {

// Standard normal CDF via the complementary error function.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Epsilons above this are reported as +infinity (privacy is vacuous there,
// and the bisection needs a finite bracket).
inline constexpr double kEpsilonCap = 200.0;

// Exact Gaussian-mechanism delta at (mu, epsilon); clamped to [0, 1].
// mu = 0 means a data-independent query, which leaks nothing.
inline double gaussian_delta(double mu, double epsilon) {
  if (mu < 0.0) throw DomainError("gaussian_delta: mu must be non-negative");
  if (epsilon < 0.0) throw DomainError("gaussian_delta: epsilon must be non-negative");
  if (mu == 0.0) return 0.0;
  const double a = normal_cdf(-epsilon / mu + mu / 2.0);
  const double b = std::exp(epsilon) * normal_cdf(-epsilon / mu - mu / 2.0);
  const double d = a - b;
  if (d < 0.0) return 0.0;
  if (d > 1.0) return 1.0;
  return d;
}

// Smallest epsilon >= 0 with gaussian_delta(mu, epsilon) <= delta, to an
// absolute tolerance of 1e-9. Returns +infinity (with the cap documented
// above) when even epsilon = kEpsilonCap cannot reach the target.
inline double gaussian_epsilon(double mu, double delta) {
  if (!(mu > 0.0)) throw DomainError("gaussian_epsilon: mu must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("gaussian_epsilon: delta must lie in (0,1)");
  if (gaussian_delta(mu, 0.0) <= delta) return 0.0;
  double lo = 0.0, hi = kEpsilonCap;
  if (gaussian_delta(mu, hi) > delta)
    return std::numeric_limits<double>::infinity();
  // Invariant: delta(lo) > target >= delta(hi).
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_delta(mu, mid) > delta)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
// Seeded with the asymptotic log form (or a branch-point series near -1/e)
// and polished with Halley iterations until the defining equation
// w * e^w = x holds to 1e-12 relative.
inline double lambert_w_minus1(double x) {
  const double branch = -std::exp(-1.0);
  if (!(x < 0.0) || x < branch) {
    // Tolerate values a few ulps below -1/e from upstream rounding.
    if (x >= branch * (1.0 + 1e-12) && x < 0.0) {
      x = branch;
    } else {
      throw DomainError("lambert_w_minus1: x must lie in [-1/e, 0)");
    }
  }
  if (x == branch) return -1.0;

  double w;
  const double p2 = 2.0 * (std::exp(1.0) * x + 1.0);
  if (p2 < 0.5) {
    // Branch-point series: w = -1 - p - p^2/3 - ..., p = sqrt(2(ex + 1)).
    const double p = std::sqrt(p2);
    w = -1.0 - p - p2 / 3.0;
  } else {
    // Asymptotic seed; lands below -1 for every x in the domain once the
    // branch-point series covers the region near -1/e.
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= 1e-13 * std::abs(x)) break;
    const double fp = ew * (1.0 + w);
    const double fpp = ew * (2.0 + w);
    const double denom = fp - 0.5 * f * fpp / fp;
    const double step = f / denom;
    w -= step;
    if (w > -1.0) w = -1.0;  // stay on the lower branch
    if (std::abs(step) <= 1e-16 * std::abs(w)) break;
  }
  return w;
}

struct RdpConfidence {
  double rho = 0.0;
  double gamma = 0.0;
};

// Confidence level of an empirical sensitivity estimate over n samples.
inline RdpConfidence rdp_confidence(std::int64_t n) {
  if (n < 1) throw DomainError("rdp_confidence: n must be at least 1");
  const double w = lambert_w_minus1(-1.0 / (4.0 * static_cast<double>(n)));
  RdpConfidence c;
  c.rho = std::exp(0.5 * w);
  c.gamma = c.rho + std::sqrt(std::log(1.0 / c.rho) /
                              (2.0 * static_cast<double>(n)));
  return c;
}

// Analytic sensitivity bound for T iterations of smoothed-clipped SGD with
// learning rate eta, smoothness beta, minibatch size m and clip norm C:
// 2 * ((1 + eta*beta)^T - 1) * C / ((m - 1) * beta).
inline double sensitivity_bound(double eta, double beta, std::int64_t iterations,
                                std::int64_t minibatch, double clip_norm) {
  if (!(eta > 0.0)) throw DomainError("sensitivity_bound: eta must be positive");
  if (!(beta > 0.0)) throw DomainError("sensitivity_bound: beta must be positive");
  if (iterations < 0) throw DomainError("sensitivity_bound: T must be non-negative");
  if (minibatch < 2)
    throw DomainError("sensitivity_bound: minibatch must be at least 2");
  if (!(clip_norm > 0.0))
    throw DomainError("sensitivity_bound: clip norm must be positive");
  const double growth =
      std::pow(1.0 + eta * beta, static_cast<double>(iterations)) - 1.0;
  return 2.0 * growth * clip_norm /
         ((static_cast<double>(minibatch) - 1.0) * beta);
}

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Composition of k sequential releases: (k*eps, k*delta), delta capped at 1.
inline PrivacyBudget compose(std::int64_t k, PrivacyBudget budget) {
  if (k < 1) throw DomainError("compose: k must be at least 1");
  PrivacyBudget out;
  out.epsilon = static_cast<double>(k) * budget.epsilon;
  out.delta = static_cast<double>(k) * budget.delta;
  if (out.delta > 1.0) out.delta = 1.0;
  return out;
}

enum class CertificateBasis { kSensitivitySampler, kAnalyticBound };

// The privacy statement attached to one Gaussian parameter release.
struct RandomDpCertificate {
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma = 0.0;     // confidence; 0 for analytic (standard-DP) bases
  std::int64_t n = 0;     // sensitivity samples; 0 for analytic bases
  double s_bar = 0.0;     // sensitivity used for calibration
  double sigma = 0.0;     // Gaussian noise std
  double mu = 0.0;        // s_bar / sigma
  CertificateBasis basis = CertificateBasis::kSensitivitySampler;
  bool degenerate = false;  // zero measured sensitivity

  // Internal consistency: epsilon must invert the delta formula at mu, and
  // gamma must match the confidence formula at n.
  void validate() const {
    if (std::isinf(epsilon)) return;
    if (mu > 0.0 && gaussian_delta(mu, epsilon) > delta + 1e-9)
      throw InvariantError("certificate: (epsilon, delta) inconsistent with mu");
    if (basis == CertificateBasis::kSensitivitySampler && n >= 1) {
      const RdpConfidence c = rdp_confidence(n);
      if (std::abs(c.gamma - gamma) > 1e-12)
        throw InvariantError("certificate: gamma inconsistent with n");
    }
  }
};

inline const char* to_string(CertificateBasis b) {
  return b == CertificateBasis::kSensitivitySampler ? "sensitivity_sampler"
                                                    : "analytic_bound";
}

}  // namespace privaudit

#endif  // PRIVAUDIT_ACCOUNTING_HPP
