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
// Deterministic synthetic data sources. Record r of any draw depends only
// on (source seed, draw key, r), so draws replay exactly, prefixes are
// stable, and adjacent-pair construction shares records bit for bit.

#ifndef PRIVAUDIT_DATA_HPP
#define PRIVAUDIT_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "privaudit/error.hpp"
#include "privaudit/model.hpp"
#include "privaudit/rng.hpp"

namespace privaudit {

enum class SourceKind { kGaussianBlobs, kSyntheticSequences };

// A synthetic population. Gaussian blobs are m isotropic unit-variance
// Gaussians whose centers sit on the signed coordinate axes at radius
// 3 * separation (distinct for m <= 2 * dims; adjacent centers are then
// 3*sqrt(2)*separation apart, which keeps the task comfortably learnable
// at separation 1). Synthetic sequences are variable-length token strings
// labeled by their majority token, with one class biased per record so the
// majority is usually unambiguous.
struct DataSource {
  SourceKind kind = SourceKind::kGaussianBlobs;
  std::uint64_t seed = 0;

  // gaussian_blobs
  int dims = 2;
  int classes = 2;
  double separation = 1.0;

  // synthetic_sequences (classes doubles as the token vocabulary size)
  int len_min = 4;
  int len_max = 8;
  double dominant_prob = 0.75;

  int feature_dim() const {
    return kind == SourceKind::kGaussianBlobs ? dims : classes;
  }

  std::uint64_t fingerprint() const {
    std::string s = kind == SourceKind::kGaussianBlobs ? "blobs" : "seq";
    s += ':' + std::to_string(seed) + ':' + std::to_string(dims) + ':' +
         std::to_string(classes) + ':' + std::to_string(separation) + ':' +
         std::to_string(len_min) + ':' + std::to_string(len_max) + ':' +
         std::to_string(dominant_prob);
    return rng::fnv1a64(s);
  }
};

inline DataSource make_source(SourceKind kind, const DataSource& params,
                              std::uint64_t seed) {
  DataSource s = params;
  s.kind = kind;
  s.seed = seed;
  if (s.classes < 2) throw ConfigError("data.classes: need at least 2 classes");
  if (kind == SourceKind::kGaussianBlobs) {
    if (s.dims < 1) throw ConfigError("data.dims: must be positive");
    if (s.classes > 2 * s.dims)
      throw ConfigError("data.classes: blob centers need classes <= 2*dims");
    if (!(s.separation > 0.0))
      throw ConfigError("data.separation: must be positive");
  } else {
    if (s.len_min < 1 || s.len_max < s.len_min)
      throw ConfigError("data.len_min/len_max: need 1 <= len_min <= len_max");
    if (!(s.dominant_prob >= 0.0 && s.dominant_prob < 1.0))
      throw ConfigError("data.dominant_prob: must lie in [0,1)");
  }
  return s;
}

namespace detail {

inline std::vector<double> blob_center(const DataSource& s, int label) {
  std::vector<double> c(s.dims, 0.0);
  const int axis = label % s.dims;
  const double sign = label < s.dims ? 1.0 : -1.0;
  c[axis] = sign * 3.0 * s.separation;
  return c;
}

inline Example draw_record(const DataSource& s, std::uint64_t draw_key,
                           std::uint64_t index) {
  const std::uint64_t base = rng::mix64(s.seed ^ rng::mix64(draw_key));
  rng::Stream st = rng::stream(base, "record", index);
  Example ex;
  if (s.kind == SourceKind::kGaussianBlobs) {
    ex.label = static_cast<int>(st.below(static_cast<std::uint64_t>(s.classes)));
    std::vector<double> f = blob_center(s, ex.label);
    for (double& v : f) v += st.gaussian();
    ex.steps.push_back(std::move(f));
    return ex;
  }
  const int m = s.classes;
  const int dominant = static_cast<int>(st.below(static_cast<std::uint64_t>(m)));
  const int len =
      s.len_min + static_cast<int>(st.below(
                      static_cast<std::uint64_t>(s.len_max - s.len_min + 1)));
  ex.tokens.resize(len);
  std::vector<int> counts(m, 0);
  for (int t = 0; t < len; ++t) {
    int tok;
    if (st.uniform() < s.dominant_prob) {
      tok = dominant;
    } else {
      tok = static_cast<int>(st.below(static_cast<std::uint64_t>(m - 1)));
      if (tok >= dominant) ++tok;
    }
    ex.tokens[t] = tok;
    ++counts[tok];
  }
  // Label is the actual majority token; ties break to the smallest index.
  int best = 0;
  for (int c = 1; c < m; ++c)
    if (counts[c] > counts[best]) best = c;
  ex.label = best;
  ex.steps.assign(len, std::vector<double>(m, 0.0));
  for (int t = 0; t < len; ++t) ex.steps[t][ex.tokens[t]] = 1.0;
  return ex;
}

}  // namespace detail

inline Dataset draw(const DataSource& source, std::size_t count,
                    std::uint64_t key) {
  if (count < 1) throw ConfigError("draw: count must be at least 1");
  Dataset out;
  out.reserve(count);
  for (std::size_t r = 0; r < count; ++r)
    out.push_back(detail::draw_record(source, key, r));
  return out;
}

// Adjacent datasets for sensitivity sampling: D1 holds records 0..N-1, D2
// replaces the record at position N-1 with record N. Both have size N and
// share exactly N-1 records at identical positions.
inline std::pair<Dataset, Dataset> draw_adjacent_pair(const DataSource& source,
                                                      std::size_t n,
                                                      std::uint64_t key) {
  if (n < 2) throw ConfigError("draw_adjacent_pair: need N >= 2");
  Dataset all = draw(source, n + 1, key);
  Dataset d1(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  Dataset d2 = d1;
  d2[n - 1] = all[n];
  return {std::move(d1), std::move(d2)};
}

}  // namespace privaudit

#endif  // PRIVAUDIT_DATA_HPP
