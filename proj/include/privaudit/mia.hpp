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
// Shadow-model membership inference.
//
// The attacker trains k stand-in models with the victim's architecture and
// training recipe on its own data pool, labels their outputs member /
// non-member, and fits a binary classifier on (confidence, reference-label)
// pairs. Sequence tasks expose one confidence block per prediction step;
// blocks are concatenated over a fixed number of trailing steps, shorter
// sequences are left-padded with uniform blocks, and the reference label is
// repeated per block, so classifier inputs have a fixed width.
//
// Evaluation sets are always exactly balanced, making 0.5 the accuracy of
// any label-independent guesser.

#ifndef PRIVAUDIT_MIA_HPP
#define PRIVAUDIT_MIA_HPP

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "privaudit/data.hpp"
#include "privaudit/error.hpp"
#include "privaudit/model.hpp"
#include "privaudit/nn.hpp"
#include "privaudit/parallel.hpp"
#include "privaudit/rng.hpp"
#include "privaudit/train.hpp"

namespace privaudit {

// The 3-tuple an attack classifier trains on: what the model answered, what
// the right answer was, and whether the query was a training member.
struct AttackRecord {
  std::vector<double> confidence;
  std::vector<double> reference;
  bool member = false;
};

struct ShadowSet {
  ModelSpec spec;
  std::vector<ParamVector> params;
  std::vector<std::vector<std::size_t>> in_sets;   // pool indices per shadow
  std::vector<std::vector<std::size_t>> out_sets;  // pool indices per shadow
  bool bootstrap = false;
};

struct EvalQuery {
  Example example;
  bool member = false;
};
using EvalSplit = std::vector<EvalQuery>;

// Confidence/reference feature blocks for one query against one model.
// `attack_steps` fixes the number of trailing prediction steps used.
inline std::pair<std::vector<double>, std::vector<double>> attack_feature_parts(
    const ModelSpec& spec, const ParamVector& params, const Example& ex,
    int attack_steps) {
  if (attack_steps < 1) throw ConfigError("attack.steps: must be at least 1");
  const int m = spec.classes();
  const std::vector<ConfidenceVector> steps = forward_steps(spec, params, ex);
  std::vector<double> confidence;
  std::vector<double> reference;
  confidence.reserve(static_cast<std::size_t>(attack_steps) * m);
  reference.reserve(static_cast<std::size_t>(attack_steps) * m);
  for (int s = 0; s < attack_steps; ++s) {
    const int idx = static_cast<int>(steps.size()) - attack_steps + s;
    if (idx < 0) {
      confidence.insert(confidence.end(), static_cast<std::size_t>(m),
                        1.0 / static_cast<double>(m));
    } else {
      const ConfidenceVector& p = steps[static_cast<std::size_t>(idx)];
      confidence.insert(confidence.end(), p.begin(), p.end());
    }
    for (int j = 0; j < m; ++j)
      reference.push_back(j == ex.label ? 1.0 : 0.0);
  }
  return {std::move(confidence), std::move(reference)};
}

// Trains k shadow models with the victim's architecture and recipe on the
// attacker pool. In-sets are disjoint slices of a seeded pool permutation
// when the pool is large enough (the leftover partition provides the
// non-member queries); otherwise each shadow bootstrap-resamples its
// training set and queries its own complement.
inline ShadowSet train_shadow_models(const ModelSpec& spec,
                                     const TrainConfig& cfg, const Dataset& pool,
                                     int k, int shadow_train_size,
                                     std::uint64_t seed, int jobs = 1) {
  if (k < 1) throw ConfigError("attack.shadows: need at least 1");
  if (shadow_train_size < 1)
    throw ConfigError("attack.shadow_train_size: must be positive");
  if (pool.size() < static_cast<std::size_t>(shadow_train_size) + 1)
    throw ConfigError("attack pool too small for one shadow training set");

  ShadowSet out;
  out.spec = spec;
  out.params.resize(static_cast<std::size_t>(k));
  out.in_sets.resize(static_cast<std::size_t>(k));
  out.out_sets.resize(static_cast<std::size_t>(k));

  const std::size_t need =
      static_cast<std::size_t>(k) * static_cast<std::size_t>(shadow_train_size);
  out.bootstrap = pool.size() < need + 1;

  std::vector<std::vector<std::size_t>> train_multisets(
      static_cast<std::size_t>(k));
  if (!out.bootstrap) {
    rng::Stream split = rng::stream(seed, "shadowsplit");
    const std::vector<std::size_t> perm = split.permutation(pool.size());
    std::vector<std::size_t> leftover(perm.begin() + static_cast<std::ptrdiff_t>(need),
                                      perm.end());
    std::sort(leftover.begin(), leftover.end());
    for (int j = 0; j < k; ++j) {
      const std::size_t base = static_cast<std::size_t>(j) *
                               static_cast<std::size_t>(shadow_train_size);
      std::vector<std::size_t> in(perm.begin() + static_cast<std::ptrdiff_t>(base),
                                  perm.begin() + static_cast<std::ptrdiff_t>(
                                                     base + shadow_train_size));
      std::sort(in.begin(), in.end());
      train_multisets[static_cast<std::size_t>(j)] = in;
      out.in_sets[static_cast<std::size_t>(j)] = std::move(in);
      out.out_sets[static_cast<std::size_t>(j)] = leftover;
    }
  } else {
    for (int j = 0; j < k; ++j) {
      rng::Stream bs = rng::stream(seed, "bootstrap", static_cast<std::uint64_t>(j));
      std::vector<std::size_t>& multi = train_multisets[static_cast<std::size_t>(j)];
      multi.resize(static_cast<std::size_t>(shadow_train_size));
      for (auto& idx : multi) idx = bs.below(pool.size());
      std::vector<std::size_t> unique = multi;
      std::sort(unique.begin(), unique.end());
      unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
      std::vector<std::size_t> complement;
      complement.reserve(pool.size() - unique.size());
      std::size_t u = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (u < unique.size() && unique[u] == i) {
          ++u;
        } else {
          complement.push_back(i);
        }
      }
      if (complement.empty())
        throw ConfigError("attack pool too small: a bootstrap shadow saw every record");
      out.in_sets[static_cast<std::size_t>(j)] = std::move(unique);
      out.out_sets[static_cast<std::size_t>(j)] = std::move(complement);
    }
  }

  parallel_for(static_cast<std::size_t>(k), jobs, [&](std::size_t j) {
    Dataset train_set;
    train_set.reserve(train_multisets[j].size());
    for (std::size_t idx : train_multisets[j]) train_set.push_back(pool[idx]);
    TrainConfig shadow_cfg = cfg;
    shadow_cfg.seed = rng::derive_key(seed, "shadow", j);
    out.params[j] = train(spec, shadow_cfg, train_set, Dataset{}).params;
  });
  return out;
}

// One record per (shadow, queried pool example); the larger side is
// subsampled so member and non-member counts match exactly.
inline std::vector<AttackRecord> build_attack_dataset(const ShadowSet& shadows,
                                                      const Dataset& pool,
                                                      int attack_steps,
                                                      std::uint64_t seed) {
  std::vector<AttackRecord> members;
  std::vector<AttackRecord> outsiders;
  for (std::size_t j = 0; j < shadows.params.size(); ++j) {
    for (std::size_t idx : shadows.in_sets[j]) {
      auto [conf, ref] = attack_feature_parts(shadows.spec, shadows.params[j],
                                              pool[idx], attack_steps);
      members.push_back({std::move(conf), std::move(ref), true});
    }
    for (std::size_t idx : shadows.out_sets[j]) {
      auto [conf, ref] = attack_feature_parts(shadows.spec, shadows.params[j],
                                              pool[idx], attack_steps);
      outsiders.push_back({std::move(conf), std::move(ref), false});
    }
  }
  const std::size_t keep = std::min(members.size(), outsiders.size());
  auto subsample = [&](std::vector<AttackRecord>& v, std::string_view label) {
    if (v.size() <= keep) return;
    rng::Stream st = rng::stream(seed, label);
    const std::vector<std::size_t> perm = st.permutation(v.size());
    std::vector<AttackRecord> kept;
    kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) kept.push_back(std::move(v[perm[i]]));
    v = std::move(kept);
  };
  subsample(members, "balance_in");
  subsample(outsiders, "balance_out");
  std::vector<AttackRecord> records;
  records.reserve(2 * keep);
  for (auto& r : members) records.push_back(std::move(r));
  for (auto& r : outsiders) records.push_back(std::move(r));
  return records;
}

// The attacker's binary classifier: a small feed-forward network over the
// concatenated (confidence, reference) features. Class 1 = member.
struct AttackClassifier {
  ModelSpec spec;
  ParamVector params;

  bool operator()(const std::vector<double>& features) const {
    Example ex;
    ex.steps.push_back(features);
    return argmax(forward(spec, params, ex)) == 1;
  }
};

inline AttackClassifier train_attack_classifier(
    const std::vector<AttackRecord>& records, const std::vector<int>& hidden,
    const TrainConfig& cfg, std::uint64_t seed) {
  if (records.empty()) throw ConfigError("attack records: empty");
  bool has_member = false, has_outsider = false;
  for (const AttackRecord& r : records) (r.member ? has_member : has_outsider) = true;
  if (!has_member || !has_outsider)
    throw ConfigError("attack records: need both member and non-member examples");

  const std::size_t width = records[0].confidence.size() + records[0].reference.size();
  Dataset train_set;
  train_set.reserve(records.size());
  for (const AttackRecord& r : records) {
    if (r.confidence.size() != records[0].confidence.size() ||
        r.reference.size() != r.confidence.size())
      throw InvariantError("attack records: inconsistent feature widths");
    Example ex;
    ex.steps.emplace_back();
    ex.steps[0].reserve(width);
    ex.steps[0].insert(ex.steps[0].end(), r.confidence.begin(), r.confidence.end());
    ex.steps[0].insert(ex.steps[0].end(), r.reference.begin(), r.reference.end());
    ex.label = r.member ? 1 : 0;
    train_set.push_back(std::move(ex));
  }

  AttackClassifier clf;
  clf.spec.kind = ModelKind::kFeedForward;
  clf.spec.hidden_activation = Activation::kRelu;
  clf.spec.layer_dims.push_back(static_cast<int>(width));
  for (int h : hidden) clf.spec.layer_dims.push_back(h);
  clf.spec.layer_dims.push_back(2);

  TrainConfig clf_cfg = cfg;
  clf_cfg.seed = seed;
  clf.params = train(clf.spec, clf_cfg, train_set, Dataset{}).params;
  return clf;
}

// Fraction of correct membership inferences over victim-model outputs.
// `predict` maps a feature vector to a member verdict; the split must hold
// exactly as many members as non-members.
template <class Predictor>
double evaluate_attack(Predictor&& predict, const ModelSpec& victim_spec,
                       const ParamVector& victim_params, const EvalSplit& split,
                       int attack_steps = 1) {
  if (split.empty()) throw ConfigError("attack eval split: empty");
  std::size_t members = 0;
  for (const EvalQuery& q : split) members += q.member ? 1 : 0;
  if (2 * members != split.size())
    throw ConfigError("attack eval split: must be exactly balanced");
  std::size_t hits = 0;
  for (const EvalQuery& q : split) {
    auto [conf, ref] =
        attack_feature_parts(victim_spec, victim_params, q.example, attack_steps);
    std::vector<double> features = std::move(conf);
    features.insert(features.end(), ref.begin(), ref.end());
    const bool inferred = predict(features);
    if (inferred == q.member) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(split.size());
}

struct ScatterRow {
  double entropy = 0.0;  // prediction entropy of the victim's confidence
  double loss = 0.0;     // victim cross-entropy on the true label
  bool member = false;
  bool inferred = false;
  bool correct = false;
};

// Per-query (entropy, loss, flags) table behind the threshold-behavior
// analysis of attack decisions.
template <class Predictor>
std::vector<ScatterRow> entropy_loss_table(const ModelSpec& victim_spec,
                                           const ParamVector& victim_params,
                                           Predictor&& predict,
                                           const EvalSplit& split,
                                           int attack_steps = 1) {
  if (split.empty()) throw ConfigError("attack eval split: empty");
  std::vector<ScatterRow> rows;
  rows.reserve(split.size());
  for (const EvalQuery& q : split) {
    ScatterRow row;
    const ConfidenceVector p = forward(victim_spec, victim_params, q.example);
    row.entropy = entropy_of(p);
    row.loss = -std::log(std::max(p[q.example.label], kProbabilityFloor));
    auto [conf, ref] =
        attack_feature_parts(victim_spec, victim_params, q.example, attack_steps);
    std::vector<double> features = std::move(conf);
    features.insert(features.end(), ref.begin(), ref.end());
    row.member = q.member;
    row.inferred = predict(features);
    row.correct = row.inferred == row.member;
    rows.push_back(row);
  }
  return rows;
}

// Population-minus-training loss estimate.
inline double generalization_error(const ModelSpec& spec, const ParamVector& params,
                                   const Dataset& train_set, const Dataset& fresh_set) {
  if (train_set.empty() || fresh_set.empty())
    throw ConfigError("generalization_error: empty dataset");
  return loss(spec, params, fresh_set) - loss(spec, params, train_set);
}

// 1 - private/base. Negative values (the private model improved) are
// reported as-is.
inline double utility_loss(double metric_base, double metric_private) {
  if (metric_base == 0.0)
    throw DomainError("utility_loss: base metric is zero");
  return 1.0 - metric_private / metric_base;
}

// Bundled attack hyperparameters used by the experiment runners.
struct AttackPipelineConfig {
  int shadows = 5;
  int shadow_train_size = 128;
  int attack_steps = 1;
  std::vector<int> classifier_hidden = {32, 32};
  TrainConfig classifier_train;
};

struct AttackOutcome {
  double attack_accuracy = 0.0;
  AttackClassifier classifier;
  std::size_t member_records = 0;
  std::size_t record_count = 0;
  bool bootstrap_policy = false;
};

// Full pipeline: shadows -> records -> classifier -> balanced evaluation.
inline AttackOutcome run_attack(const ModelSpec& victim_spec,
                                const ParamVector& victim_params,
                                const TrainConfig& victim_cfg, const Dataset& pool,
                                const EvalSplit& eval_split,
                                const AttackPipelineConfig& pcfg,
                                std::uint64_t seed, int jobs = 1) {
  const ShadowSet shadows =
      train_shadow_models(victim_spec, victim_cfg, pool, pcfg.shadows,
                          pcfg.shadow_train_size, seed, jobs);
  const std::vector<AttackRecord> records =
      build_attack_dataset(shadows, pool, pcfg.attack_steps, seed);
  AttackOutcome out;
  out.bootstrap_policy = shadows.bootstrap;
  out.record_count = records.size();
  out.member_records = records.size() / 2;
  out.classifier =
      train_attack_classifier(records, pcfg.classifier_hidden,
                              pcfg.classifier_train, rng::derive_key(seed, "clf"));
  out.attack_accuracy = evaluate_attack(out.classifier, victim_spec, victim_params,
                                        eval_split, pcfg.attack_steps);
  return out;
}

// Balanced evaluation split: `count` members sampled from the victim's
// training set plus `count` fresh non-members drawn from the source.
inline EvalSplit make_eval_split(const Dataset& victim_train, std::size_t count,
                                 const DataSource& source, std::uint64_t fresh_key,
                                 std::uint64_t seed) {
  if (count < 1) throw ConfigError("attack.eval_members: must be positive");
  if (victim_train.size() < count)
    throw ConfigError("attack.eval_members: victim training set too small");
  EvalSplit split;
  split.reserve(2 * count);
  rng::Stream st = rng::stream(seed, "evalpick");
  const std::vector<std::size_t> perm = st.permutation(victim_train.size());
  for (std::size_t i = 0; i < count; ++i)
    split.push_back({victim_train[perm[i]], true});
  const Dataset fresh = draw(source, count, fresh_key);
  for (const Example& ex : fresh) split.push_back({ex, false});
  return split;
}

struct MemorizationProfile {
  std::vector<double> per_batch_accuracy;
  TrainOutcome victim;
  AttackClassifier classifier;
};

// Sequential-training memorization probe: the victim and every shadow train
// on an ordered sequence of disjoint batches; the attack is then scored
// against each victim batch separately (members of that batch vs an equal
// number of fresh records).
inline MemorizationProfile memorization_profile(
    const ModelSpec& spec, const TrainConfig& victim_cfg,
    const std::vector<Dataset>& victim_batches, const Dataset& pool,
    const DataSource& source, const AttackPipelineConfig& pcfg,
    std::uint64_t seed, int jobs = 1) {
  if (victim_batches.size() < 2)
    throw ConfigError("memorization: need at least 2 sequential batches");
  for (const Dataset& b : victim_batches)
    if (b.empty()) throw ConfigError("memorization: empty batch");

  MemorizationProfile out;
  TrainConfig vc = victim_cfg;
  out.victim = train_sequential(spec, vc, victim_batches, Dataset{});

  // Shadows replicate the sequential schedule on slices of the pool.
  const std::size_t k = static_cast<std::size_t>(pcfg.shadows);
  const std::size_t batches = victim_batches.size();
  const std::size_t batch_size = victim_batches[0].size();
  const std::size_t per_shadow = batches * batch_size;
  if (pool.size() < k * per_shadow + 1)
    throw ConfigError("memorization: attacker pool too small for sequential shadows");

  rng::Stream split_stream = rng::stream(seed, "shadowsplit");
  const std::vector<std::size_t> perm = split_stream.permutation(pool.size());
  std::vector<std::size_t> leftover(
      perm.begin() + static_cast<std::ptrdiff_t>(k * per_shadow), perm.end());
  std::sort(leftover.begin(), leftover.end());

  ShadowSet shadows;
  shadows.spec = spec;
  shadows.params.resize(k);
  shadows.in_sets.resize(k);
  shadows.out_sets.resize(k);
  parallel_for(k, jobs, [&](std::size_t j) {
    std::vector<Dataset> shadow_batches(batches);
    std::vector<std::size_t> in;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      for (std::size_t r = 0; r < batch_size; ++r) {
        const std::size_t idx = perm[j * per_shadow + bi * batch_size + r];
        shadow_batches[bi].push_back(pool[idx]);
        in.push_back(idx);
      }
    }
    std::sort(in.begin(), in.end());
    TrainConfig cfg = victim_cfg;
    cfg.seed = rng::derive_key(seed, "shadow", j);
    shadows.params[j] = train_sequential(spec, cfg, shadow_batches, Dataset{}).params;
    shadows.in_sets[j] = std::move(in);
    shadows.out_sets[j] = leftover;
  });

  const std::vector<AttackRecord> records =
      build_attack_dataset(shadows, pool, pcfg.attack_steps, seed);
  out.classifier =
      train_attack_classifier(records, pcfg.classifier_hidden,
                              pcfg.classifier_train, rng::derive_key(seed, "clf"));

  out.per_batch_accuracy.resize(batches);
  for (std::size_t bi = 0; bi < batches; ++bi) {
    EvalSplit split;
    split.reserve(2 * victim_batches[bi].size());
    for (const Example& ex : victim_batches[bi]) split.push_back({ex, true});
    const Dataset fresh = draw(source, victim_batches[bi].size(),
                               rng::derive_key(seed, "memeval", bi));
    for (const Example& ex : fresh) split.push_back({ex, false});
    out.per_batch_accuracy[bi] = evaluate_attack(out.classifier, spec,
                                                 out.victim.params, split,
                                                 pcfg.attack_steps);
  }
  return out;
}

}  // namespace privaudit

#endif  // PRIVAUDIT_MIA_HPP
