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
// Forward/backward engine for the two desk-scale classifiers: a multilayer
// perceptron and an Elman-style tanh recurrent cell, both with a softmax
// output and categorical cross-entropy loss. Everything here is a pure
// function of its arguments and bitwise deterministic.
//
// Cross-entropy uses the natural logarithm, so the maximum prediction
// entropy of an m-class model is ln(m). Probabilities are floored at 1e-12
// inside the loss so a confident miss never produces an infinite loss.

#ifndef PRIVAUDIT_NN_HPP
#define PRIVAUDIT_NN_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "privaudit/error.hpp"
#include "privaudit/model.hpp"

namespace privaudit {

inline constexpr double kProbabilityFloor = 1e-12;

struct GradOptions {
  // Coefficient of an L2 penalty on hidden-node activations, folded into
  // the backward pass. Zero disables the penalty path entirely.
  double activation_l2 = 0.0;
};

namespace detail {

inline double activate(Activation a, double z) {
  return a == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the activation value where possible.
inline double activate_deriv(Activation a, double z, double act) {
  return a == Activation::kTanh ? 1.0 - act * act : (z > 0.0 ? 1.0 : 0.0);
}

inline void check_finite(const std::vector<double>& v, const char* where) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite activation in ") + where);
}

inline void softmax_inplace(std::vector<double>& logits) {
  check_finite(logits, "softmax logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

inline void check_input(const ModelSpec& spec, const Example& ex) {
  if (spec.kind == ModelKind::kFeedForward) {
    if (ex.steps.size() != 1)
      throw ShapeError("feedforward input must have exactly one step");
    if (static_cast<int>(ex.steps[0].size()) != spec.layer_dims.front())
      throw ShapeError("input dimension does not match model");
  } else {
    if (ex.steps.empty()) throw ShapeError("recurrent input needs at least one step");
    for (const auto& s : ex.steps)
      if (static_cast<int>(s.size()) != spec.input_dim)
        throw ShapeError("sequence step dimension does not match model");
  }
}

inline void check_params(const ModelSpec& spec, const ParamVector& params) {
  if (params.size() != spec.param_count())
    throw ShapeError("parameter vector length does not match model");
}

// y = W x + b with W row-major (rows x cols) starting at w.
inline void affine(const double* w, const double* b, const double* x,
                   std::size_t rows, std::size_t cols, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = b[r];
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] = s;
  }
}

// Feedforward pass keeping all layer activations for backprop.
struct FfnTrace {
  std::vector<std::vector<double>> pre;   // z per non-input layer
  std::vector<std::vector<double>> act;   // a per layer, act[0] = input
  std::vector<double> probs;
};

inline void ffn_forward(const ModelSpec& spec, const ParamVector& params,
                        const std::vector<double>& input, FfnTrace& t) {
  const auto& dims = spec.layer_dims;
  const std::size_t layers = dims.size() - 1;
  t.pre.resize(layers);
  t.act.resize(dims.size());
  t.act[0] = input;
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t rows = dims[l + 1], cols = dims[l];
    t.pre[l].resize(rows);
    affine(&params[off], &params[off + rows * cols], t.act[l].data(), rows,
           cols, t.pre[l].data());
    off += rows * cols + rows;
    t.act[l + 1].resize(rows);
    if (l != layers - 1) {
      for (std::size_t r = 0; r < rows; ++r)
        t.act[l + 1][r] = activate(spec.hidden_activation, t.pre[l][r]);
      check_finite(t.act[l + 1], "hidden layer");
    } else {
      t.act[l + 1] = t.pre[l];
    }
  }
  t.probs = t.act.back();
  softmax_inplace(t.probs);
}

// Recurrent pass keeping hidden states for backprop through time.
struct RnnTrace {
  std::vector<std::vector<double>> h;  // h[0] = initial zero state
  std::vector<double> probs;
};

inline void rnn_forward(const ModelSpec& spec, const ParamVector& params,
                        const Example& ex, RnnTrace& t) {
  const std::size_t hd = spec.hidden_dim, id = spec.input_dim,
                    m = spec.num_classes;
  const std::size_t steps = ex.steps.size();
  const double* wxh = &params[0];
  const double* whh = &params[hd * id];
  const double* bh = &params[hd * id + hd * hd];
  const double* why = &params[hd * id + hd * hd + hd];
  const double* by = &params[hd * id + hd * hd + hd + m * hd];

  t.h.assign(steps + 1, std::vector<double>(hd, 0.0));
  std::vector<double> z(hd);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto& x = ex.steps[s];
    for (std::size_t j = 0; j < hd; ++j) {
      double v = bh[j];
      const double* wxr = wxh + j * id;
      for (std::size_t i = 0; i < id; ++i) v += wxr[i] * x[i];
      const double* whr = whh + j * hd;
      const auto& hp = t.h[s];
      for (std::size_t k = 0; k < hd; ++k) v += whr[k] * hp[k];
      z[j] = v;
    }
    check_finite(z, "recurrent cell");
    for (std::size_t j = 0; j < hd; ++j) t.h[s + 1][j] = std::tanh(z[j]);
  }
  t.probs.resize(m);
  affine(why, by, t.h[steps].data(), m, hd, t.probs.data());
  softmax_inplace(t.probs);
}

// Readout of one hidden state (per-step confidence queries).
inline std::vector<double> rnn_readout(const ModelSpec& spec,
                                       const ParamVector& params,
                                       const std::vector<double>& h) {
  const std::size_t hd = spec.hidden_dim, id = spec.input_dim,
                    m = spec.num_classes;
  const double* why = &params[hd * id + hd * hd + hd];
  const double* by = &params[hd * id + hd * hd + hd + m * hd];
  std::vector<double> out(m);
  affine(why, by, h.data(), m, hd, out.data());
  softmax_inplace(out);
  return out;
}

}  // namespace detail

// Softmax class probabilities for one input.
inline ConfidenceVector forward(const ModelSpec& spec, const ParamVector& params,
                                const Example& ex) {
  detail::check_params(spec, params);
  detail::check_input(spec, ex);
  if (spec.kind == ModelKind::kFeedForward) {
    detail::FfnTrace t;
    detail::ffn_forward(spec, params, ex.steps[0], t);
    return t.probs;
  }
  detail::RnnTrace t;
  detail::rnn_forward(spec, params, ex, t);
  return t.probs;
}

// Per-step confidences. Feedforward models produce a single step; recurrent
// models apply the shared readout to every hidden state, which is how
// sequence tasks expose one confidence vector per prediction step.
inline std::vector<ConfidenceVector> forward_steps(const ModelSpec& spec,
                                                   const ParamVector& params,
                                                   const Example& ex) {
  detail::check_params(spec, params);
  detail::check_input(spec, ex);
  if (spec.kind == ModelKind::kFeedForward) {
    detail::FfnTrace t;
    detail::ffn_forward(spec, params, ex.steps[0], t);
    return {t.probs};
  }
  detail::RnnTrace t;
  detail::rnn_forward(spec, params, ex, t);
  std::vector<ConfidenceVector> out;
  out.reserve(ex.steps.size());
  for (std::size_t s = 1; s <= ex.steps.size(); ++s)
    out.push_back(detail::rnn_readout(spec, params, t.h[s]));
  return out;
}

inline int argmax(const ConfidenceVector& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

inline double example_loss(const ModelSpec& spec, const ParamVector& params,
                           const Example& ex) {
  if (ex.label < 0 || ex.label >= spec.classes())
    throw ShapeError("label out of range");
  const ConfidenceVector p = forward(spec, params, ex);
  return -std::log(std::max(p[ex.label], kProbabilityFloor));
}

// Mean categorical cross-entropy over a batch.
inline double loss(const ModelSpec& spec, const ParamVector& params,
                   std::span<const Example> batch) {
  if (batch.empty()) throw ShapeError("loss: empty batch");
  double s = 0.0;
  for (const Example& ex : batch) s += example_loss(spec, params, ex);
  return s / static_cast<double>(batch.size());
}

inline double accuracy(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Example> batch) {
  if (batch.empty()) throw ShapeError("accuracy: empty batch");
  std::size_t hits = 0;
  for (const Example& ex : batch)
    if (argmax(forward(spec, params, ex)) == ex.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

// Gradient of the per-example loss, accumulated into `out` (which must be
// zero-initialized or hold a running sum). Exact backpropagation; through
// time for the recurrent cell.
inline void accumulate_grad(const ModelSpec& spec, const ParamVector& params,
                            const Example& ex, const GradOptions& opts,
                            ParamVector& out) {
  detail::check_params(spec, params);
  detail::check_input(spec, ex);
  if (ex.label < 0 || ex.label >= spec.classes())
    throw ShapeError("label out of range");
  if (out.size() != params.size())
    throw ShapeError("gradient accumulator size mismatch");

  if (spec.kind == ModelKind::kFeedForward) {
    detail::FfnTrace t;
    detail::ffn_forward(spec, params, ex.steps[0], t);
    const auto& dims = spec.layer_dims;
    const std::size_t layers = dims.size() - 1;

    // Per-layer parameter offsets.
    std::vector<std::size_t> offs(layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offs[l] = off;
      off += static_cast<std::size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
    }

    std::vector<double> delta = t.probs;
    delta[ex.label] -= 1.0;  // d loss / d logits
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t rows = dims[l + 1], cols = dims[l];
      double* gw = &out[offs[l]];
      double* gb = &out[offs[l] + rows * cols];
      const auto& below = t.act[l];
      for (std::size_t r = 0; r < rows; ++r) {
        const double d = delta[r];
        double* gwr = gw + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gwr[c] += d * below[c];
        gb[r] += d;
      }
      if (l == 0) break;
      std::vector<double> next(cols, 0.0);
      const double* w = &params[offs[l]];
      for (std::size_t r = 0; r < rows; ++r) {
        const double d = delta[r];
        const double* wr = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) next[c] += wr[c] * d;
      }
      // Hidden activation a_l = act(z_{l-1}); optional activation penalty.
      for (std::size_t c = 0; c < cols; ++c) {
        double up = next[c];
        if (opts.activation_l2 != 0.0) up += opts.activation_l2 * t.act[l][c];
        next[c] = up * detail::activate_deriv(spec.hidden_activation,
                                              t.pre[l - 1][c], t.act[l][c]);
      }
      delta = std::move(next);
    }
    return;
  }

  // Recurrent: backprop through time.
  detail::RnnTrace t;
  detail::rnn_forward(spec, params, ex, t);
  const std::size_t hd = spec.hidden_dim, id = spec.input_dim,
                    m = spec.num_classes;
  const std::size_t steps = ex.steps.size();
  const std::size_t o_wxh = 0, o_whh = hd * id, o_bh = hd * id + hd * hd,
                    o_why = o_bh + hd, o_by = o_why + m * hd;

  std::vector<double> dlogits = t.probs;
  dlogits[ex.label] -= 1.0;
  const auto& hT = t.h[steps];
  for (std::size_t r = 0; r < m; ++r) {
    const double d = dlogits[r];
    double* gw = &out[o_why + r * hd];
    for (std::size_t j = 0; j < hd; ++j) gw[j] += d * hT[j];
    out[o_by + r] += d;
  }
  std::vector<double> dh(hd, 0.0);
  const double* why = &params[o_why];
  for (std::size_t r = 0; r < m; ++r) {
    const double d = dlogits[r];
    const double* wr = why + r * hd;
    for (std::size_t j = 0; j < hd; ++j) dh[j] += wr[j] * d;
  }

  std::vector<double> dz(hd);
  const double* whh = &params[o_whh];
  for (std::size_t s = steps; s-- > 0;) {
    const auto& h = t.h[s + 1];
    const auto& hprev = t.h[s];
    const auto& x = ex.steps[s];
    for (std::size_t j = 0; j < hd; ++j) {
      double up = dh[j];
      if (opts.activation_l2 != 0.0) up += opts.activation_l2 * h[j];
      dz[j] = up * (1.0 - h[j] * h[j]);
    }
    for (std::size_t j = 0; j < hd; ++j) {
      const double d = dz[j];
      double* gx = &out[o_wxh + j * id];
      for (std::size_t i = 0; i < id; ++i) gx[i] += d * x[i];
      double* gh = &out[o_whh + j * hd];
      for (std::size_t k = 0; k < hd; ++k) gh[k] += d * hprev[k];
      out[o_bh + j] += d;
    }
    if (s == 0) break;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t j = 0; j < hd; ++j) {
      const double d = dz[j];
      const double* wr = whh + j * hd;
      for (std::size_t k = 0; k < hd; ++k) dh[k] += wr[k] * d;
    }
  }
}

inline ParamVector grad_example(const ModelSpec& spec, const ParamVector& params,
                                const Example& ex, const GradOptions& opts = {}) {
  ParamVector g(params.size());
  accumulate_grad(spec, params, ex, opts, g);
  return g;
}

// Mean gradient over a batch: per-example gradients accumulated in batch
// order, scaled by 1/batch at the end (the same arithmetic the trainer uses,
// so noise-free DP-SGD reproduces plain SGD bit for bit).
inline ParamVector grad(const ModelSpec& spec, const ParamVector& params,
                        std::span<const Example> batch,
                        const GradOptions& opts = {}) {
  if (batch.empty()) throw ShapeError("grad: empty batch");
  ParamVector acc(params.size());
  ParamVector g(params.size());
  for (const Example& ex : batch) {
    std::fill(g.values.begin(), g.values.end(), 0.0);
    accumulate_grad(spec, params, ex, opts, g);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  }
  acc.scale(1.0 / static_cast<double>(batch.size()));
  return acc;
}

inline void validate_confidence(const ConfidenceVector& p) {
  if (p.empty()) throw InvariantError("confidence vector is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0))
      throw InvariantError("confidence entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvariantError("confidence vector does not sum to 1");
}

// Average prediction entropy of a batch of (outcome, confidence) pairs,
// natural log, with 0*ln(0) taken as 0. Ranges over [0, ln m].
inline double prediction_entropy(const PredictionBatch& batch) {
  if (batch.empty()) throw InvariantError("prediction batch is empty");
  double total = 0.0;
  for (const auto& [outcome, p] : batch) {
    validate_confidence(p);
    if (outcome < 0 || outcome >= static_cast<int>(p.size()))
      throw InvariantError("outcome index out of range");
    for (double v : p)
      if (v > 0.0) total -= v * std::log(v);
  }
  return total / static_cast<double>(batch.size());
}

inline double entropy_of(const ConfidenceVector& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace privaudit

#endif  // PRIVAUDIT_NN_HPP
