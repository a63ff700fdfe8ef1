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
// Deterministic SGD-family training.
//
// Modes:
//   plain            theta -= eta * mean(g_x)
//   l2               plain plus an L2 penalty: weight decay by default, or
//                    a penalty on hidden activations when l2_on_activations
//                    is set. lambda = 0 is bit-identical to plain.
//   dp_sgd           per-example gradients clipped to norm C, summed, one
//                    Gaussian draw of std C*sigma added to the sum, then
//                    averaged: theta -= eta/|X| * (sum CL(g_x, C) + noise).
//   smoothed_clipped per-example gradients replaced by a K-sample Monte
//                    Carlo randomized-smoothing estimate (Gaussian parameter
//                    perturbations of std sigma_s), clipped to C, averaged.
//                    No noise term; the privacy statement comes from the
//                    sensitivity bound instead.
//
// Determinism: initialization, minibatch order, DP noise and smoothing
// perturbations all come from sub-streams keyed off config.seed, so a run
// replays bit for bit. Minibatch permutations depend only on the dataset
// SIZE, never its contents, which keeps index selection aligned between
// adjacent datasets (the property the sensitivity analysis relies on).
//
// The trainer also tracks the largest raw per-example gradient norm it
// observes; twice that value serves as the empirical Lipschitz estimate
// used by the analytic sensitivity bound.

#ifndef PRIVAUDIT_TRAIN_HPP
#define PRIVAUDIT_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "privaudit/accounting.hpp"
#include "privaudit/error.hpp"
#include "privaudit/model.hpp"
#include "privaudit/nn.hpp"
#include "privaudit/rng.hpp"

namespace privaudit {

enum class TrainMode { kPlain, kL2, kDpSgd, kSmoothedClipped };

struct TrainConfig {
  TrainMode mode = TrainMode::kPlain;
  double learning_rate = 0.1;
  std::int64_t iterations = 0;
  int minibatch_size = 1;
  double clip_norm = 1.0;         // C
  double noise_multiplier = 0.0;  // sigma; dp_sgd noise std is C*sigma
  double smoothing_std = 1.0;     // sigma_s
  int smoothing_samples = 8;      // K
  double l2_coefficient = 0.0;    // lambda
  bool l2_on_activations = false;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  double dp_delta_step = 1e-5;  // per-release delta for the dp_sgd ledger

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("train.learning_rate: must be positive and finite");
    if (iterations < 0) throw ConfigError("train.iterations: must be non-negative");
    if (minibatch_size < 1)
      throw ConfigError("train.minibatch_size: must be at least 1");
    if (mode == TrainMode::kDpSgd || mode == TrainMode::kSmoothedClipped) {
      if (!(clip_norm > 0.0) || !std::isfinite(clip_norm))
        throw ConfigError("train.clip_norm: must be positive and finite");
    }
    if (mode == TrainMode::kDpSgd && noise_multiplier < 0.0)
      throw ConfigError("train.noise_multiplier: must be non-negative");
    if (mode == TrainMode::kSmoothedClipped) {
      if (!(smoothing_std > 0.0) || !std::isfinite(smoothing_std))
        throw ConfigError("train.smoothing_std: must be positive and finite");
      if (smoothing_samples < 1)
        throw ConfigError("train.smoothing_samples: must be at least 1");
    }
    if (l2_coefficient < 0.0)
      throw ConfigError("train.l2_coefficient: must be non-negative");
    if (init_scale < 0.0) throw ConfigError("train.init_scale: must be non-negative");
    if (!(dp_delta_step > 0.0 && dp_delta_step < 1.0))
      throw ConfigError("train.dp_delta_step: must lie in (0,1)");
  }

  std::uint64_t fingerprint(const ModelSpec& spec) const {
    std::string s;
    s += spec.kind == ModelKind::kFeedForward ? "ffn:" : "rnn:";
    for (int d : spec.layer_dims) s += std::to_string(d) + ',';
    s += spec.hidden_activation == Activation::kTanh ? "tanh" : "relu";
    s += ';' + std::to_string(spec.input_dim) + ',' +
         std::to_string(spec.hidden_dim) + ',' + std::to_string(spec.num_classes);
    s += "|mode" + std::to_string(static_cast<int>(mode));
    s += "|lr" + std::to_string(learning_rate);
    s += "|T" + std::to_string(iterations);
    s += "|mb" + std::to_string(minibatch_size);
    s += "|C" + std::to_string(clip_norm);
    s += "|nm" + std::to_string(noise_multiplier);
    s += "|ss" + std::to_string(smoothing_std);
    s += "|K" + std::to_string(smoothing_samples);
    s += "|l2" + std::to_string(l2_coefficient) +
         (l2_on_activations ? "act" : "w");
    s += "|is" + std::to_string(init_scale);
    s += "|seed" + std::to_string(seed);
    return rng::fnv1a64(s);
  }
};

struct TraceRow {
  std::int64_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainOutcome {
  ParamVector params;
  std::vector<TraceRow> trace;
  // dp_sgd only: one (epsilon, delta) entry per noisy release.
  std::vector<PrivacyBudget> ledger;
  double max_example_grad_norm = 0.0;
  std::int64_t iterations_run = 0;

  // Empirical Lipschitz estimate: max observed per-example gradient norm
  // with a x2 safety factor.
  double lipschitz_estimate() const { return 2.0 * max_example_grad_norm; }
};

using StepObserver =
    std::function<void(std::int64_t step, const ParamVector& params)>;

// g * min(1, C/||g||): rescales to norm at most C, preserving direction.
// Vectors already within the ball pass through unchanged (bit for bit).
inline ParamVector clip_gradient(const ParamVector& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw DomainError("clip_gradient: C must be positive");
  const double norm = g.l2_norm();
  if (norm <= clip_norm) return g;
  ParamVector out = g;
  out.scale(clip_norm / norm);
  return out;
}

// Generic K-sample randomized-smoothing estimate of a gradient field:
// (1/K) sum_k grad_at(center + Z_k) with Z_k ~ N(0, sigma_s^2 I) drawn from
// `stream` coordinate-by-coordinate in layout order, one block per sample.
template <class GradFn>
ParamVector smoothed_estimate(GradFn&& grad_at, const ParamVector& center,
                              double sigma_s, int samples, rng::Stream& stream) {
  if (!(sigma_s > 0.0)) throw DomainError("smoothed_estimate: sigma_s must be positive");
  if (samples < 1) throw DomainError("smoothed_estimate: K must be at least 1");
  ParamVector acc(center.size());
  ParamVector perturbed(center.size());
  for (int k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < center.size(); ++i)
      perturbed[i] = center[i] + sigma_s * stream.gaussian();
    const ParamVector g = grad_at(perturbed);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  }
  acc.scale(1.0 / static_cast<double>(samples));
  return acc;
}

// Monte Carlo estimate of the smoothed per-example loss gradient.
inline ParamVector smoothed_gradient(const ModelSpec& spec,
                                     const ParamVector& params,
                                     const Example& ex, double sigma_s,
                                     int samples, rng::Stream& stream) {
  return smoothed_estimate(
      [&](const ParamVector& at) { return grad_example(spec, at, ex); }, params,
      sigma_s, samples, stream);
}

namespace detail {

struct Phase {
  const Dataset* data;
  std::int64_t iterations;
};

// Accumulates the mode-specific step gradient over one minibatch into `acc`
// (sum form, not yet averaged). Positions in the batch index the smoothing
// sub-streams, so adjacent datasets draw aligned perturbations.
inline void accumulate_step_gradient(const ModelSpec& spec,
                                     const TrainConfig& cfg,
                                     const Dataset& data,
                                     const std::vector<std::size_t>& perm,
                                     std::size_t base, std::size_t batch,
                                     std::int64_t global_step,
                                     TrainOutcome& out, ParamVector& acc,
                                     ParamVector& scratch) {
  for (std::size_t b = 0; b < batch; ++b) {
    const Example& ex = data[perm[base + b]];
    switch (cfg.mode) {
      case TrainMode::kPlain:
      case TrainMode::kL2: {
        GradOptions opts;
        if (cfg.mode == TrainMode::kL2 && cfg.l2_on_activations)
          opts.activation_l2 = cfg.l2_coefficient;
        std::fill(scratch.values.begin(), scratch.values.end(), 0.0);
        accumulate_grad(spec, out.params, ex, opts, scratch);
        out.max_example_grad_norm =
            std::max(out.max_example_grad_norm, scratch.l2_norm());
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scratch[i];
        break;
      }
      case TrainMode::kDpSgd: {
        std::fill(scratch.values.begin(), scratch.values.end(), 0.0);
        accumulate_grad(spec, out.params, ex, {}, scratch);
        const double norm = scratch.l2_norm();
        out.max_example_grad_norm = std::max(out.max_example_grad_norm, norm);
        if (norm > cfg.clip_norm) scratch.scale(cfg.clip_norm / norm);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scratch[i];
        break;
      }
      case TrainMode::kSmoothedClipped: {
        rng::Stream st(rng::mix64(
            rng::derive_key(cfg.seed, "smooth",
                            static_cast<std::uint64_t>(global_step)) +
            (static_cast<std::uint64_t>(b) + 1) * rng::kGolden));
        ParamVector g = smoothed_estimate(
            [&](const ParamVector& at) {
              ParamVector pg = grad_example(spec, at, ex);
              out.max_example_grad_norm =
                  std::max(out.max_example_grad_norm, pg.l2_norm());
              return pg;
            },
            out.params, cfg.smoothing_std, cfg.smoothing_samples, st);
        const double norm = g.l2_norm();
        if (norm > cfg.clip_norm) g.scale(cfg.clip_norm / norm);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        break;
      }
    }
  }

  if (cfg.mode == TrainMode::kDpSgd && cfg.noise_multiplier > 0.0) {
    rng::Stream ns = rng::stream(cfg.seed, "dpnoise",
                                 static_cast<std::uint64_t>(global_step));
    const double std_dev = cfg.clip_norm * cfg.noise_multiplier;
    for (double& v : acc.values) v += std_dev * ns.gaussian();
  }

  acc.scale(1.0 / static_cast<double>(batch));

  // Weight decay (the default l2 form): gradient of lambda/2 * ||w||^2,
  // biases exempt. Skipped entirely at lambda = 0 so that mode l2 with
  // lambda 0 matches plain bit for bit.
  if (cfg.mode == TrainMode::kL2 && !cfg.l2_on_activations &&
      cfg.l2_coefficient != 0.0) {
    for_each_segment(spec, [&](std::size_t lo, std::size_t hi, bool is_bias) {
      if (is_bias) return;
      for (std::size_t i = lo; i < hi; ++i)
        acc[i] += cfg.l2_coefficient * out.params[i];
    });
  }
}

inline TrainOutcome run_phases(const ModelSpec& spec, const TrainConfig& cfg,
                               const std::vector<Phase>& phases,
                               const Dataset& val_set, const StepObserver& obs) {
  spec.validate();
  cfg.validate();
  for (const Phase& ph : phases)
    if (ph.data->empty()) throw ConfigError("train: empty training set");

  TrainOutcome out;
  out.params = ParamVector(spec.param_count());
  {
    rng::Stream init = rng::stream(cfg.seed, "init");
    for (double& v : out.params.values)
      v = init.uniform_range(-cfg.init_scale, cfg.init_scale);
  }

  const double eta = cfg.learning_rate;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Per-step epsilon of one dp_sgd release at the configured delta:
  // sensitivity C, noise std C*sigma, so mu = 1/sigma.
  PrivacyBudget step_budget;
  if (cfg.mode == TrainMode::kDpSgd) {
    step_budget.delta = cfg.dp_delta_step;
    step_budget.epsilon =
        cfg.noise_multiplier > 0.0
            ? gaussian_epsilon(1.0 / cfg.noise_multiplier, cfg.dp_delta_step)
            : std::numeric_limits<double>::infinity();
  }

  ParamVector acc(out.params.size());
  ParamVector scratch(out.params.size());
  std::int64_t global_step = 0;
  std::int64_t global_epoch = 0;

  for (std::size_t phase_idx = 0; phase_idx < phases.size(); ++phase_idx) {
    const Dataset& data = *phases[phase_idx].data;
    const std::int64_t steps = phases[phase_idx].iterations;
    const std::size_t n = data.size();
    const std::size_t batch =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.minibatch_size), n);
    const std::int64_t per_epoch =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(n / batch));

    std::vector<std::size_t> perm;
    for (std::int64_t s = 0; s < steps; ++s, ++global_step) {
      const std::int64_t epoch = s / per_epoch;
      const std::int64_t pos = s % per_epoch;
      if (pos == 0) {
        rng::Stream ps = rng::stream(
            cfg.seed, "perm",
            (static_cast<std::uint64_t>(phase_idx) << 32) |
                static_cast<std::uint64_t>(epoch));
        perm = ps.permutation(n);
      }
      const std::size_t base = static_cast<std::size_t>(pos) * batch;

      try {
        std::fill(acc.values.begin(), acc.values.end(), 0.0);
        accumulate_step_gradient(spec, cfg, data, perm, base, batch,
                                 global_step, out, acc, scratch);
        if (cfg.mode == TrainMode::kDpSgd) out.ledger.push_back(step_budget);
        if (!acc.all_finite()) throw NumericError("non-finite gradient");
        out.params.add_scaled(acc, -eta);
        if (!out.params.all_finite())
          throw NumericError("non-finite parameters");
        ++out.iterations_run;
        if (obs) obs(global_step, out.params);

        if ((s + 1) % per_epoch == 0 || s + 1 == steps) {
          TraceRow row;
          row.epoch = global_epoch++;
          row.train_loss = loss(spec, out.params, data);
          row.train_acc = accuracy(spec, out.params, data);
          row.val_loss = val_set.empty() ? nan : loss(spec, out.params, val_set);
          row.val_acc = val_set.empty() ? nan : accuracy(spec, out.params, val_set);
          if (!std::isfinite(row.train_loss))
            throw NumericError("non-finite loss");
          out.trace.push_back(row);
        }
      } catch (const NumericError& e) {
        throw NumericError("training diverged at iteration " +
                           std::to_string(global_step) + ": " + e.what());
      }
    }
  }
  return out;
}

}  // namespace detail

// Train on one dataset for config.iterations steps.
inline TrainOutcome train(const ModelSpec& spec, const TrainConfig& cfg,
                          const Dataset& train_set, const Dataset& val_set,
                          const StepObserver& obs = {}) {
  std::vector<detail::Phase> phases{{&train_set, cfg.iterations}};
  return detail::run_phases(spec, cfg, phases, val_set, obs);
}

// Sequential-batch schedule: config.iterations steps on each batch in order,
// parameters carried across batches (the memorization experiment).
inline TrainOutcome train_sequential(const ModelSpec& spec,
                                     const TrainConfig& cfg,
                                     const std::vector<Dataset>& batches,
                                     const Dataset& val_set,
                                     const StepObserver& obs = {}) {
  if (batches.empty()) throw ConfigError("train_sequential: no batches");
  std::vector<detail::Phase> phases;
  phases.reserve(batches.size());
  for (const Dataset& b : batches) phases.push_back({&b, cfg.iterations});
  return detail::run_phases(spec, cfg, phases, val_set, obs);
}

}  // namespace privaudit

#endif  // PRIVAUDIT_TRAIN_HPP
