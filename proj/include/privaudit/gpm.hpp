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
// Post-training Gaussian parameter release: perturb the trained parameters
// once, answer every query with the perturbed network, attach a privacy
// certificate to the deployment. Queries never touch the base parameters
// and add no per-query noise, so privacy does not degrade with query count;
// re-deploying with a fresh seed is a new release and budgets then compose.

#ifndef PRIVAUDIT_GPM_HPP
#define PRIVAUDIT_GPM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "privaudit/accounting.hpp"
#include "privaudit/error.hpp"
#include "privaudit/model.hpp"
#include "privaudit/nn.hpp"
#include "privaudit/rng.hpp"

namespace privaudit {

struct GpmDeployment {
  ModelSpec spec;
  ParamVector base;
  ParamVector perturbed;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::optional<RandomDpCertificate> certificate;
};

// One-shot Gaussian perturbation of the trained parameters. sigma = 0 keeps
// the parameters bit-identical to the base model.
inline GpmDeployment gpm_deploy(const ModelSpec& spec, const ParamVector& params,
                                double sigma, std::uint64_t seed) {
  spec.validate();
  if (params.size() != spec.param_count())
    throw ShapeError("gpm_deploy: parameter vector length does not match model");
  if (sigma < 0.0) throw ConfigError("gpm.sigma: must be non-negative");
  GpmDeployment d;
  d.spec = spec;
  d.base = params;
  d.perturbed = params;
  d.sigma = sigma;
  d.seed = seed;
  if (sigma > 0.0) {
    rng::Stream st = rng::stream(seed, "gpm");
    for (double& v : d.perturbed.values) v += sigma * st.gaussian();
  }
  return d;
}

// Answers every query with the perturbed network. Pure; safe to call
// concurrently and any number of times.
inline std::vector<ConfidenceVector> gpm_respond(const GpmDeployment& d,
                                                 const std::vector<Example>& queries) {
  std::vector<ConfidenceVector> out;
  out.reserve(queries.size());
  for (const Example& q : queries) out.push_back(forward(d.spec, d.perturbed, q));
  return out;
}

// Random-DP certificate from an empirical sensitivity estimate over n
// samples: mu = S_bar/sigma, epsilon inverts the Gaussian delta formula at
// the target delta, gamma is the sampling confidence. A zero sensitivity
// yields a degenerate epsilon = 0 certificate (data-independent trainer)
// and is flagged as such.
inline RandomDpCertificate gpm_certificate(double s_bar, std::int64_t n,
                                           double sigma, double delta_target) {
  if (s_bar < 0.0) throw DomainError("gpm_certificate: S_bar must be non-negative");
  if (!(sigma > 0.0)) throw DomainError("gpm_certificate: sigma must be positive");
  if (n < 1) throw DomainError("gpm_certificate: n must be at least 1");
  if (!(delta_target > 0.0 && delta_target < 1.0))
    throw DomainError("gpm_certificate: delta must lie in (0,1)");
  RandomDpCertificate cert;
  cert.basis = CertificateBasis::kSensitivitySampler;
  cert.s_bar = s_bar;
  cert.sigma = sigma;
  cert.delta = delta_target;
  cert.n = n;
  cert.mu = s_bar / sigma;
  const RdpConfidence conf = rdp_confidence(n);
  cert.gamma = conf.gamma;
  if (s_bar == 0.0) {
    cert.epsilon = 0.0;
    cert.degenerate = true;
  } else {
    cert.epsilon = gaussian_epsilon(cert.mu, delta_target);
  }
  return cert;
}

// Standard-DP certificate from an analytic sensitivity bound (no sampling
// confidence involved).
inline RandomDpCertificate gpm_certificate_analytic(double sensitivity_bound_value,
                                                    double sigma,
                                                    double delta_target) {
  if (sensitivity_bound_value < 0.0)
    throw DomainError("gpm_certificate: bound must be non-negative");
  if (!(sigma > 0.0)) throw DomainError("gpm_certificate: sigma must be positive");
  if (!(delta_target > 0.0 && delta_target < 1.0))
    throw DomainError("gpm_certificate: delta must lie in (0,1)");
  RandomDpCertificate cert;
  cert.basis = CertificateBasis::kAnalyticBound;
  cert.s_bar = sensitivity_bound_value;
  cert.sigma = sigma;
  cert.delta = delta_target;
  cert.mu = sensitivity_bound_value / sigma;
  if (sensitivity_bound_value == 0.0) {
    cert.epsilon = 0.0;
    cert.degenerate = true;
  } else {
    cert.epsilon = gaussian_epsilon(cert.mu, delta_target);
  }
  return cert;
}

}  // namespace privaudit

#endif  // PRIVAUDIT_GPM_HPP
