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
// Model descriptors and the flattened parameter vector.
//
// Parameter layout (layout version 1): parameters are stored layer by layer,
// weight matrix first (row-major, output index major), bias second.
//   feedforward: W0, b0, W1, b1, ... for layer_dims = [n0, n1, ..., nL];
//                Wl has shape (n(l+1) x nl), bl has length n(l+1).
//   recurrent:   Wxh (hidden x input), Whh (hidden x hidden), bh (hidden),
//                Why (classes x hidden), by (classes).
// All values are IEEE-754 64-bit floats.

#ifndef PRIVAUDIT_MODEL_HPP
#define PRIVAUDIT_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "privaudit/error.hpp"

namespace privaudit {

enum class ModelKind { kFeedForward, kRecurrent };
enum class Activation { kTanh, kRelu };
enum class RecurrentCell { kElmanTanh };

struct ModelSpec {
  ModelKind kind = ModelKind::kFeedForward;

  // Feedforward: input -> hidden... -> classes.
  std::vector<int> layer_dims;
  Activation hidden_activation = Activation::kTanh;

  // Recurrent: single cell followed by a linear+softmax readout of the
  // final hidden state.
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;
  RecurrentCell cell = RecurrentCell::kElmanTanh;

  int classes() const {
    return kind == ModelKind::kFeedForward ? layer_dims.back() : num_classes;
  }

  int input_size() const {
    return kind == ModelKind::kFeedForward ? layer_dims.front() : input_dim;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    if (kind == ModelKind::kFeedForward) {
      for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        n += static_cast<std::size_t>(layer_dims[l + 1]) * layer_dims[l] +
             layer_dims[l + 1];
      }
    } else {
      const std::size_t h = hidden_dim, i = input_dim, m = num_classes;
      n = h * i + h * h + h + m * h + m;
    }
    return n;
  }

  void validate() const {
    if (kind == ModelKind::kFeedForward) {
      if (layer_dims.size() < 2)
        throw ConfigError("model.layer_dims: need at least input and output");
      for (int d : layer_dims)
        if (d < 1) throw ConfigError("model.layer_dims: dimensions must be positive");
      if (layer_dims.back() < 2)
        throw ConfigError("model.layer_dims: need at least 2 output classes");
    } else {
      if (input_dim < 1) throw ConfigError("model.input_dim: must be positive");
      if (hidden_dim < 1) throw ConfigError("model.hidden_dim: must be positive");
      if (num_classes < 2) throw ConfigError("model.num_classes: need at least 2");
    }
  }
};

// Flattened trainable parameters in the layout documented above.
struct ParamVector {
  std::vector<double> values;

  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values(n, fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  const double& operator[](std::size_t i) const { return values[i]; }

  double l2_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void add_scaled(const ParamVector& other, double scale) {
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] += scale * other.values[i];
  }

  void scale(double s) {
    for (double& v : values) v *= s;
  }
};

inline double param_distance(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) throw ShapeError("param_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// One record. Feedforward inputs hold exactly one step; recurrent inputs
// hold one feature vector per time step. `tokens` carries the source token
// ids for sequence tasks (persistence only, not used by the models).
struct Example {
  std::vector<std::vector<double>> steps;
  int label = 0;
  std::vector<int> tokens;
};

using Dataset = std::vector<Example>;
using ConfidenceVector = std::vector<double>;
using PredictionBatch = std::vector<std::pair<int, ConfidenceVector>>;

// Calls fn(begin, end, is_bias) for every contiguous parameter segment in
// layout order. Used for weight-only penalties and layout-aware tooling.
template <class F>
void for_each_segment(const ModelSpec& spec, F&& fn) {
  std::size_t off = 0;
  auto seg = [&](std::size_t n, bool is_bias) {
    fn(off, off + n, is_bias);
    off += n;
  };
  if (spec.kind == ModelKind::kFeedForward) {
    for (std::size_t l = 0; l + 1 < spec.layer_dims.size(); ++l) {
      seg(static_cast<std::size_t>(spec.layer_dims[l + 1]) * spec.layer_dims[l],
          false);
      seg(static_cast<std::size_t>(spec.layer_dims[l + 1]), true);
    }
  } else {
    const std::size_t h = spec.hidden_dim, i = spec.input_dim,
                      m = spec.num_classes;
    seg(h * i, false);
    seg(h * h, false);
    seg(h, true);
    seg(m * h, false);
    seg(m, true);
  }
}

}  // namespace privaudit

#endif  // PRIVAUDIT_MODEL_HPP
