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
// Empirical sensitivity estimation: train the same pipeline on sampled
// adjacent dataset pairs and record the largest parameter distance. Record
// draws for sample i use a sub-stream keyed by (source seed, i), and each
// sample writes only its own slot, so the report is identical for any
// parallelism degree and the sample-i distance never depends on n.

#ifndef PRIVAUDIT_SENSITIVITY_HPP
#define PRIVAUDIT_SENSITIVITY_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "privaudit/data.hpp"
#include "privaudit/error.hpp"
#include "privaudit/model.hpp"
#include "privaudit/parallel.hpp"
#include "privaudit/train.hpp"

namespace privaudit {

struct SensitivityReport {
  int n = 0;           // requested samples
  int train_size = 0;  // N
  std::vector<double> distances;
  double s_bar = 0.0;  // max_i distances[i]
  std::uint64_t trainer_fingerprint = 0;
  std::uint64_t source_fingerprint = 0;
  double max_example_grad_norm = 0.0;  // max over every training run
  bool completed = true;
  int failed_sample = -1;  // first diverged sample when not completed

  double lipschitz_estimate() const { return 2.0 * max_example_grad_norm; }
};

// Algorithm: for each sample i, draw N+1 records from the source, form the
// adjacent pair (first N) / (first N-1 plus record N), train on both with
// the identical fixed-seed config, and record the L2 distance between the
// resulting parameter vectors. S_bar is the max.
//
// A diverged training run flags its sample and aborts the whole estimate;
// the partial report is returned with completed = false so no certificate
// can silently drop samples.
inline SensitivityReport sample_sensitivity(const ModelSpec& spec,
                                            const TrainConfig& cfg,
                                            const DataSource& source,
                                            int train_size, int samples,
                                            int jobs = 1) {
  if (samples < 1) throw ConfigError("sensitivity.samples: need at least 1");
  if (train_size < 2) throw ConfigError("sensitivity.train_size: need N >= 2");
  cfg.validate();

  SensitivityReport report;
  report.n = samples;
  report.train_size = train_size;
  report.trainer_fingerprint = cfg.fingerprint(spec);
  report.source_fingerprint = source.fingerprint();
  report.distances.assign(static_cast<std::size_t>(samples), 0.0);

  std::vector<double> grad_norms(static_cast<std::size_t>(samples), 0.0);
  // Every sample is attempted even after a failure, so the surviving prefix
  // is the same for any parallelism degree; the smallest failed index wins.
  std::atomic<int> failed{samples};
  const Dataset no_val;

  parallel_for(static_cast<std::size_t>(samples), jobs, [&](std::size_t i) {
    auto [d1, d2] = draw_adjacent_pair(
        source, static_cast<std::size_t>(train_size), /*key=*/i);
    try {
      const TrainOutcome a = train(spec, cfg, d1, no_val);
      const TrainOutcome b = train(spec, cfg, d2, no_val);
      report.distances[i] = param_distance(a.params, b.params);
      grad_norms[i] =
          std::max(a.max_example_grad_norm, b.max_example_grad_norm);
    } catch (const NumericError&) {
      int prev = failed.load();
      while (static_cast<int>(i) < prev &&
             !failed.compare_exchange_weak(prev, static_cast<int>(i))) {
      }
    }
  });

  if (failed.load() < samples) {
    report.completed = false;
    report.failed_sample = failed.load();
    report.distances.resize(static_cast<std::size_t>(report.failed_sample));
    grad_norms.resize(static_cast<std::size_t>(report.failed_sample));
  }
  for (double d : report.distances) report.s_bar = std::max(report.s_bar, d);
  for (double g : grad_norms)
    report.max_example_grad_norm = std::max(report.max_example_grad_norm, g);
  return report;
}

}  // namespace privaudit

#endif  // PRIVAUDIT_SENSITIVITY_HPP
