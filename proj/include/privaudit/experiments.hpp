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
// Experiment runner: JSON config in, CSV/JSON artifacts out.
//
// Every random choice anywhere in an experiment derives from the master
// seed through named sub-streams, and parallel sections write to indexed
// slots, so artifacts are byte-identical across runs and across --jobs
// settings. Validation errors name the offending config field. CSVs carry
// a provenance line (toolkit version, config hash, master seed) and never
// a timestamp.

#ifndef PRIVAUDIT_EXPERIMENTS_HPP
#define PRIVAUDIT_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "privaudit/accounting.hpp"
#include "privaudit/data.hpp"
#include "privaudit/error.hpp"
#include "privaudit/gpm.hpp"
#include "privaudit/io.hpp"
#include "privaudit/mia.hpp"
#include "privaudit/model.hpp"
#include "privaudit/nn.hpp"
#include "privaudit/parallel.hpp"
#include "privaudit/rng.hpp"
#include "privaudit/sensitivity.hpp"
#include "privaudit/train.hpp"
#include "privaudit/version.hpp"

namespace privaudit {

namespace cfgdetail {

inline std::string join_path(const std::string& ctx, const char* key) {
  return ctx.empty() ? std::string(key) : ctx + "." + key;
}

template <class T>
T req(const json& j, const std::string& ctx, const char* key) {
  if (!j.contains(key))
    throw ConfigError(join_path(ctx, key) + ": missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(join_path(ctx, key) + ": wrong type");
  }
}

template <class T>
T opt(const json& j, const std::string& ctx, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(join_path(ctx, key) + ": wrong type");
  }
}

inline const json& section(const json& j, const char* key,
                           const std::string& experiment) {
  if (!j.contains(key))
    throw ConfigError(std::string(key) + ": section required for experiment '" +
                      experiment + "'");
  if (!j.at(key).is_object())
    throw ConfigError(std::string(key) + ": must be an object");
  return j.at(key);
}

}  // namespace cfgdetail

inline TrainConfig train_config_from_json(const json& j,
                                          const std::string& ctx = "train") {
  using cfgdetail::opt;
  using cfgdetail::req;
  TrainConfig c;
  const std::string mode = opt<std::string>(j, ctx, "mode", "plain");
  if (mode == "plain")
    c.mode = TrainMode::kPlain;
  else if (mode == "l2")
    c.mode = TrainMode::kL2;
  else if (mode == "dp_sgd")
    c.mode = TrainMode::kDpSgd;
  else if (mode == "smoothed_clipped")
    c.mode = TrainMode::kSmoothedClipped;
  else
    throw ConfigError(ctx + ".mode: unknown value '" + mode + "'");
  c.learning_rate = req<double>(j, ctx, "learning_rate");
  c.iterations = req<std::int64_t>(j, ctx, "iterations");
  c.minibatch_size = req<int>(j, ctx, "minibatch_size");
  c.clip_norm = opt<double>(j, ctx, "clip_norm", 1.0);
  c.noise_multiplier = opt<double>(j, ctx, "noise_multiplier", 0.0);
  c.smoothing_std = opt<double>(j, ctx, "smoothing_std", 1.0);
  c.smoothing_samples = opt<int>(j, ctx, "smoothing_samples", 8);
  c.l2_coefficient = opt<double>(j, ctx, "l2_coefficient", 0.0);
  c.l2_on_activations = opt<bool>(j, ctx, "l2_on_activations", false);
  c.init_scale = opt<double>(j, ctx, "init_scale", 0.1);
  c.dp_delta_step = opt<double>(j, ctx, "dp_delta_step", 1e-5);
  c.validate();
  return c;
}

inline DataSource data_source_from_json(const json& j, std::uint64_t seed,
                                        const std::string& ctx = "data") {
  using cfgdetail::opt;
  using cfgdetail::req;
  DataSource params;
  const std::string kind = req<std::string>(j, ctx, "kind");
  SourceKind k;
  if (kind == "gaussian_blobs") {
    k = SourceKind::kGaussianBlobs;
    params.dims = req<int>(j, ctx, "dims");
    params.classes = req<int>(j, ctx, "classes");
    params.separation = opt<double>(j, ctx, "separation", 1.0);
  } else if (kind == "synthetic_sequences") {
    k = SourceKind::kSyntheticSequences;
    params.classes = req<int>(j, ctx, "classes");
    params.len_min = opt<int>(j, ctx, "len_min", 4);
    params.len_max = opt<int>(j, ctx, "len_max", 8);
    params.dominant_prob = opt<double>(j, ctx, "dominant_prob", 0.75);
  } else {
    throw ConfigError(ctx + ".kind: unknown value '" + kind + "'");
  }
  return make_source(k, params, seed);
}

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t master_seed = 0;
  std::string out_dir = "out";
  int jobs = 1;

  json model_json;
  ModelSpec model;
  bool has_model = false;

  json train_json;
  bool has_train = false;

  json data_json;
  bool has_data = false;
  std::size_t train_size = 128;
  std::size_t val_size = 1000;
  std::size_t pool_size = 0;
  std::size_t count = 0;  // `data` experiment row count

  // attack
  AttackPipelineConfig attack;
  std::size_t eval_members = 128;

  // sensitivity
  int sensitivity_samples = 50;

  // sweeps
  std::vector<double> sigma_grid;
  std::vector<double> lambda_grid;
  int sweep_seeds = 5;
  int gpm_perturbation_seeds = 10;
  double delta_target = 1e-4;

  // memorization
  int memorization_batches = 4;

  // account
  double account_sensitivity = 0.0;
  std::int64_t account_n = 0;  // 0 = no gamma column values

  std::string config_hash;
  json raw;

  TrainConfig train_config(std::uint64_t seed) const {
    TrainConfig c = train_config_from_json(train_json);
    c.seed = seed;
    return c;
  }

  DataSource source(std::uint64_t seed) const {
    return data_source_from_json(data_json, seed);
  }

  Provenance provenance() const {
    Provenance p;
    p.config_hash = config_hash;
    p.master_seed = master_seed;
    return p;
  }
};

inline ExperimentConfig parse_experiment_config(const json& j) {
  using cfgdetail::opt;
  using cfgdetail::req;
  using cfgdetail::section;

  ExperimentConfig cfg;
  cfg.raw = j;
  {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(rng::fnv1a64(j.dump())));
    cfg.config_hash = hex;
  }

  cfg.experiment = req<std::string>(j, "", "experiment");
  static const std::vector<std::string> kKinds = {
      "data",       "train",     "attack",      "scatter", "memorization",
      "sensitivity", "account",  "sweep_dpsgd", "sweep_gpm"};
  if (std::find(kKinds.begin(), kKinds.end(), cfg.experiment) == kKinds.end())
    throw ConfigError("experiment: unknown value '" + cfg.experiment + "'");

  cfg.master_seed = req<std::uint64_t>(j, "", "master_seed");
  cfg.out_dir = opt<std::string>(j, "", "out_dir", "out");
  cfg.jobs = opt<int>(j, "", "jobs", 1);
  if (cfg.jobs < 1) throw ConfigError("jobs: must be at least 1");

  const bool needs_model = cfg.experiment != "data" && cfg.experiment != "account";
  const bool needs_train = needs_model;
  const bool needs_data = cfg.experiment != "account";

  if (j.contains("model")) {
    cfg.model_json = j.at("model");
    try {
      cfg.model = model_spec_from_json(cfg.model_json);
    } catch (const json::exception&) {
      throw ConfigError("model: malformed section");
    }
    cfg.has_model = true;
  } else if (needs_model) {
    throw ConfigError("model: section required for experiment '" +
                      cfg.experiment + "'");
  }

  if (j.contains("train")) {
    cfg.train_json = j.at("train");
    train_config_from_json(cfg.train_json);  // validate eagerly
    cfg.has_train = true;
  } else if (needs_train) {
    throw ConfigError("train: section required for experiment '" +
                      cfg.experiment + "'");
  }

  if (j.contains("data")) {
    cfg.data_json = j.at("data");
    data_source_from_json(cfg.data_json, 0);  // validate eagerly
    const json& d = cfg.data_json;
    cfg.train_size = opt<std::size_t>(d, "data", "train_size", 128);
    cfg.val_size = opt<std::size_t>(d, "data", "val_size", 1000);
    cfg.pool_size = opt<std::size_t>(d, "data", "pool_size", 0);
    cfg.count = opt<std::size_t>(d, "data", "count", cfg.train_size);
    if (cfg.train_size < 1) throw ConfigError("data.train_size: must be positive");
    if (cfg.count < 1) throw ConfigError("data.count: must be positive");
    cfg.has_data = true;
  } else if (needs_data) {
    throw ConfigError("data: section required for experiment '" +
                      cfg.experiment + "'");
  }

  const bool needs_attack = cfg.experiment == "attack" ||
                            cfg.experiment == "scatter" ||
                            cfg.experiment == "memorization" ||
                            cfg.experiment == "sweep_dpsgd" ||
                            cfg.experiment == "sweep_gpm";
  if (needs_attack) {
    const json& a = section(j, "attack", cfg.experiment);
    cfg.attack.shadows = opt<int>(a, "attack", "shadows", 5);
    cfg.attack.shadow_train_size =
        opt<int>(a, "attack", "shadow_train_size",
                 static_cast<int>(cfg.train_size));
    cfg.attack.attack_steps = opt<int>(a, "attack", "steps", 1);
    cfg.attack.classifier_hidden =
        opt<std::vector<int>>(a, "attack", "classifier_hidden", {32, 32});
    cfg.eval_members = opt<std::size_t>(a, "attack", "eval_members",
                                        std::min<std::size_t>(cfg.train_size, 128));
    if (a.contains("classifier")) {
      cfg.attack.classifier_train =
          train_config_from_json(a.at("classifier"), "attack.classifier");
    } else {
      cfg.attack.classifier_train.mode = TrainMode::kPlain;
      cfg.attack.classifier_train.learning_rate = 0.1;
      cfg.attack.classifier_train.iterations = 3000;
      cfg.attack.classifier_train.minibatch_size = 32;
    }
    if (cfg.attack.shadows < 1) throw ConfigError("attack.shadows: must be positive");
    if (cfg.pool_size == 0)
      throw ConfigError("data.pool_size: required for attack experiments");
  }

  if (cfg.experiment == "sensitivity" || cfg.experiment == "sweep_gpm") {
    const json& s = j.contains("sensitivity") && j.at("sensitivity").is_object()
                        ? j.at("sensitivity")
                        : json::object();
    cfg.sensitivity_samples = opt<int>(s, "sensitivity", "samples", 50);
    if (cfg.sensitivity_samples < 1)
      throw ConfigError("sensitivity.samples: must be positive");
  }

  if (cfg.experiment == "sweep_dpsgd" || cfg.experiment == "sweep_gpm") {
    const json& s = section(j, "sweep", cfg.experiment);
    cfg.sigma_grid = req<std::vector<double>>(s, "sweep", "sigma_grid");
    if (cfg.sigma_grid.empty() || cfg.sigma_grid.front() != 0.0)
      throw ConfigError("sweep.sigma_grid: first entry must be the 0 anchor");
    cfg.sweep_seeds = opt<int>(s, "sweep", "seeds", 5);
    cfg.gpm_perturbation_seeds = opt<int>(s, "sweep", "gpm_perturbation_seeds", 10);
    cfg.delta_target = opt<double>(s, "sweep", "delta_target", 1e-4);
    cfg.lambda_grid = opt<std::vector<double>>(s, "sweep", "lambda_grid", {});
    if (cfg.sweep_seeds < 1) throw ConfigError("sweep.seeds: must be positive");
    if (cfg.gpm_perturbation_seeds < 1)
      throw ConfigError("sweep.gpm_perturbation_seeds: must be positive");
    if (!(cfg.delta_target > 0.0 && cfg.delta_target < 1.0))
      throw ConfigError("sweep.delta_target: must lie in (0,1)");
  }

  if (cfg.experiment == "memorization") {
    const json& m = j.contains("memorization") && j.at("memorization").is_object()
                        ? j.at("memorization")
                        : json::object();
    cfg.memorization_batches = opt<int>(m, "memorization", "batches", 4);
    if (cfg.memorization_batches < 2)
      throw ConfigError("memorization.batches: need at least 2");
    if (cfg.train_size % static_cast<std::size_t>(cfg.memorization_batches) != 0)
      throw ConfigError("memorization.batches: must divide data.train_size");
  }

  if (cfg.experiment == "account") {
    const json& a = section(j, "account", cfg.experiment);
    cfg.account_sensitivity = req<double>(a, "account", "sensitivity");
    if (!(cfg.account_sensitivity > 0.0))
      throw ConfigError("account.sensitivity: must be positive");
    cfg.account_n = opt<std::int64_t>(a, "account", "n", 0);
    cfg.delta_target = opt<double>(a, "account", "delta_target", 1e-4);
    if (!(cfg.delta_target > 0.0 && cfg.delta_target < 1.0))
      throw ConfigError("account.delta_target: must lie in (0,1)");
    cfg.sigma_grid = req<std::vector<double>>(a, "account", "sigma_grid");
    if (cfg.sigma_grid.empty())
      throw ConfigError("account.sigma_grid: must not be empty");
    for (double s : cfg.sigma_grid)
      if (!(s > 0.0)) throw ConfigError("account.sigma_grid: entries must be positive");
  }

  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_experiment_config(j);
}

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

inline std::string epsilon_str(double eps) {
  return std::isinf(eps) ? "inf" : format_double(eps);
}

// Naive-composition total for a dp_sgd ledger.
inline PrivacyBudget ledger_total(const std::vector<PrivacyBudget>& ledger) {
  if (ledger.empty()) return {0.0, 0.0};
  PrivacyBudget total{0.0, 0.0};
  for (const PrivacyBudget& b : ledger) {
    total.epsilon += b.epsilon;
    total.delta += b.delta;
  }
  total.delta = std::min(total.delta, 1.0);
  return total;
}

struct VictimRun {
  TrainOutcome outcome;
  Dataset train_set;
  Dataset val_set;
};

inline VictimRun train_victim(const ExperimentConfig& cfg, TrainConfig tc) {
  VictimRun run;
  const DataSource source = cfg.source(rng::derive_key(cfg.master_seed, "source"));
  run.train_set = draw(source, cfg.train_size, rng::derive_key(cfg.master_seed, "trainset"));
  run.val_set = cfg.val_size > 0
                    ? draw(source, cfg.val_size, rng::derive_key(cfg.master_seed, "valset"))
                    : Dataset{};
  run.outcome = train(cfg.model, tc, run.train_set, run.val_set);
  return run;
}

inline void write_trace_csv(const std::string& path, const Provenance& prov,
                            const std::vector<TraceRow>& trace) {
  CsvWriter w(path, prov,
              {"epoch", "train_loss", "train_acc", "val_loss", "val_acc"});
  for (const TraceRow& row : trace) {
    w.write_row({std::to_string(row.epoch), format_double(row.train_loss),
                 format_double(row.train_acc), format_double(row.val_loss),
                 format_double(row.val_acc)});
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment bodies. Each writes its artifacts under cfg.out_dir and returns
// a summary JSON (also written where noted).

inline json run_data_experiment(const ExperimentConfig& cfg) {
  const DataSource source = cfg.source(rng::derive_key(cfg.master_seed, "source"));
  const Dataset data =
      draw(source, cfg.count, rng::derive_key(cfg.master_seed, "dataset"));
  save_dataset(cfg.out_dir + "/dataset.csv", source, data, cfg.provenance());
  json summary;
  summary["rows"] = data.size();
  summary["kind"] = cfg.data_json.at("kind");
  return summary;
}

inline json run_train_experiment(const ExperimentConfig& cfg) {
  const TrainConfig tc =
      cfg.train_config(rng::derive_key(cfg.master_seed, "victim"));
  detail::VictimRun run = detail::train_victim(cfg, tc);

  detail::write_trace_csv(cfg.out_dir + "/trace.csv", cfg.provenance(),
                          run.outcome.trace);
  save_params(cfg.out_dir + "/model.paud", cfg.model, run.outcome.params);

  json report;
  report["train_loss"] = loss(cfg.model, run.outcome.params, run.train_set);
  report["train_acc"] = accuracy(cfg.model, run.outcome.params, run.train_set);
  if (!run.val_set.empty()) {
    report["val_loss"] = loss(cfg.model, run.outcome.params, run.val_set);
    report["val_acc"] = accuracy(cfg.model, run.outcome.params, run.val_set);
  }
  report["iterations"] = run.outcome.iterations_run;
  report["lipschitz_estimate"] = run.outcome.lipschitz_estimate();
  if (!run.outcome.ledger.empty()) {
    const PrivacyBudget total = detail::ledger_total(run.outcome.ledger);
    json ledger;
    ledger["accounting"] = "naive-composition";
    ledger["steps"] = run.outcome.ledger.size();
    ledger["epsilon_step"] = detail::epsilon_str(run.outcome.ledger[0].epsilon);
    ledger["delta_step"] = run.outcome.ledger[0].delta;
    ledger["epsilon_total"] = detail::epsilon_str(total.epsilon);
    ledger["delta_total"] = total.delta;
    report["privacy_ledger"] = ledger;
  }
  detail::write_json(cfg.out_dir + "/train_report.json", report);
  return report;
}

namespace detail {

struct AttackExperimentResult {
  VictimRun victim;
  AttackOutcome attack;
  EvalSplit eval_split;
  Dataset fresh_set;
};

inline AttackExperimentResult run_attack_pipeline(const ExperimentConfig& cfg) {
  AttackExperimentResult r;
  const TrainConfig tc =
      cfg.train_config(rng::derive_key(cfg.master_seed, "victim"));
  r.victim = train_victim(cfg, tc);

  const DataSource source = cfg.source(rng::derive_key(cfg.master_seed, "source"));
  const Dataset pool =
      draw(source, cfg.pool_size, rng::derive_key(cfg.master_seed, "pool"));
  r.eval_split =
      make_eval_split(r.victim.train_set, cfg.eval_members, source,
                      rng::derive_key(cfg.master_seed, "fresh"),
                      rng::derive_key(cfg.master_seed, "evalsel"));
  r.fresh_set = draw(source, std::max<std::size_t>(cfg.eval_members, 256),
                     rng::derive_key(cfg.master_seed, "genfresh"));
  r.attack = run_attack(cfg.model, r.victim.outcome.params, tc, pool,
                        r.eval_split, cfg.attack,
                        rng::derive_key(cfg.master_seed, "attack"), cfg.jobs);
  return r;
}

inline json attack_report_json(const ExperimentConfig& cfg,
                               const AttackExperimentResult& r) {
  json report;
  report["attack_accuracy"] = r.attack.attack_accuracy;
  report["generalization_error"] =
      generalization_error(cfg.model, r.victim.outcome.params,
                           r.victim.train_set, r.fresh_set);
  report["train_loss"] = loss(cfg.model, r.victim.outcome.params, r.victim.train_set);
  report["train_acc"] = accuracy(cfg.model, r.victim.outcome.params, r.victim.train_set);
  if (!r.victim.val_set.empty()) {
    report["val_loss"] = loss(cfg.model, r.victim.outcome.params, r.victim.val_set);
    report["val_acc"] = accuracy(cfg.model, r.victim.outcome.params, r.victim.val_set);
  }
  report["attack_records"] = r.attack.record_count;
  report["shadow_policy"] = r.attack.bootstrap_policy ? "bootstrap" : "disjoint";
  report["eval_queries"] = r.eval_split.size();
  return report;
}

}  // namespace detail

inline json run_attack_experiment(const ExperimentConfig& cfg) {
  const detail::AttackExperimentResult r = detail::run_attack_pipeline(cfg);
  const json report = detail::attack_report_json(cfg, r);
  detail::write_json(cfg.out_dir + "/attack_report.json", report);
  return report;
}

inline json run_scatter_experiment(const ExperimentConfig& cfg) {
  const detail::AttackExperimentResult r = detail::run_attack_pipeline(cfg);
  const std::vector<ScatterRow> rows =
      entropy_loss_table(cfg.model, r.victim.outcome.params, r.attack.classifier,
                         r.eval_split, cfg.attack.attack_steps);
  CsvWriter w(cfg.out_dir + "/scatter.csv", cfg.provenance(),
              {"entropy", "loss", "member", "inferred", "correct"});
  for (const ScatterRow& row : rows) {
    w.write_row({format_double(row.entropy), format_double(row.loss),
                 row.member ? "1" : "0", row.inferred ? "1" : "0",
                 row.correct ? "1" : "0"});
  }
  const json report = detail::attack_report_json(cfg, r);
  detail::write_json(cfg.out_dir + "/attack_report.json", report);
  return report;
}

inline json run_memorization_experiment(const ExperimentConfig& cfg) {
  const DataSource source = cfg.source(rng::derive_key(cfg.master_seed, "source"));
  const Dataset all =
      draw(source, cfg.train_size, rng::derive_key(cfg.master_seed, "trainset"));
  const std::size_t batches = static_cast<std::size_t>(cfg.memorization_batches);
  const std::size_t per = all.size() / batches;
  std::vector<Dataset> victim_batches(batches);
  for (std::size_t b = 0; b < batches; ++b)
    victim_batches[b].assign(all.begin() + static_cast<std::ptrdiff_t>(b * per),
                             all.begin() + static_cast<std::ptrdiff_t>((b + 1) * per));

  const Dataset pool =
      draw(source, cfg.pool_size, rng::derive_key(cfg.master_seed, "pool"));
  const TrainConfig tc =
      cfg.train_config(rng::derive_key(cfg.master_seed, "victim"));
  const MemorizationProfile profile = memorization_profile(
      cfg.model, tc, victim_batches, pool, source, cfg.attack,
      rng::derive_key(cfg.master_seed, "attack"), cfg.jobs);

  CsvWriter w(cfg.out_dir + "/memorization.csv", cfg.provenance(),
              {"batch_index", "attack_accuracy"});
  for (std::size_t b = 0; b < profile.per_batch_accuracy.size(); ++b)
    w.write_row({std::to_string(b), format_double(profile.per_batch_accuracy[b])});

  json report;
  report["batches"] = batches;
  report["batch_size"] = per;
  report["per_batch_accuracy"] = profile.per_batch_accuracy;
  detail::write_json(cfg.out_dir + "/memorization_report.json", report);
  return report;
}

inline json run_sensitivity_experiment(const ExperimentConfig& cfg) {
  const DataSource source = cfg.source(rng::derive_key(cfg.master_seed, "source"));
  const TrainConfig tc =
      cfg.train_config(rng::derive_key(cfg.master_seed, "victim"));
  const SensitivityReport report = sample_sensitivity(
      cfg.model, tc, source, static_cast<int>(cfg.train_size),
      cfg.sensitivity_samples, cfg.jobs);

  CsvWriter w(cfg.out_dir + "/sensitivity.csv", cfg.provenance(),
              {"sample_index", "distance"});
  for (std::size_t i = 0; i < report.distances.size(); ++i)
    w.write_row({std::to_string(i), format_double(report.distances[i])});

  json summary;
  summary["n"] = report.n;
  summary["N"] = report.train_size;
  summary["S_bar"] = report.s_bar;
  summary["gamma"] = rdp_confidence(report.n).gamma;
  summary["completed"] = report.completed;
  if (!report.completed) summary["failed_sample"] = report.failed_sample;
  summary["lipschitz_estimate"] = report.lipschitz_estimate();
  char fp[17];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(report.trainer_fingerprint));
  summary["trainer_fingerprint"] = fp;
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(report.source_fingerprint));
  summary["source_fingerprint"] = fp;
  detail::write_json(cfg.out_dir + "/sensitivity.json", summary);
  if (!report.completed)
    throw NumericError("sensitivity sample " +
                       std::to_string(report.failed_sample) + " diverged");
  return summary;
}

inline json run_account_experiment(const ExperimentConfig& cfg) {
  Provenance prov = cfg.provenance();
  prov.extra = "accounting=gaussian-mechanism";
  CsvWriter w(cfg.out_dir + "/account.csv", prov,
              {"sigma", "mu", "epsilon", "delta", "gamma"});
  const std::string gamma_str =
      cfg.account_n >= 1 ? format_double(rdp_confidence(cfg.account_n).gamma)
                         : std::string();
  std::size_t vacuous = 0;
  for (double sigma : cfg.sigma_grid) {
    const double mu = cfg.account_sensitivity / sigma;
    const double eps = gaussian_epsilon(mu, cfg.delta_target);
    if (std::isinf(eps)) ++vacuous;
    w.write_row({format_double(sigma), format_double(mu),
                 detail::epsilon_str(eps), format_double(cfg.delta_target),
                 gamma_str});
  }
  json summary;
  summary["rows"] = cfg.sigma_grid.size();
  // Rows whose epsilon exceeds the bisection cap are reported as "inf":
  // privacy is vacuous at that noise level.
  summary["vacuous_rows"] = vacuous;
  return summary;
}

// DP-SGD privacy/utility sweep: per (sigma, seed) the victim retrains in
// dp_sgd mode and the full attack pipeline re-runs; the anchor row sigma=0
// is the undefended baseline, so its utility loss is exactly 0.
inline json run_sweep_dpsgd_experiment(const ExperimentConfig& cfg) {
  struct Cell {
    double val_acc = 0.0;
    double attack_accuracy = 0.0;
    double epsilon_total = 0.0;
    double delta_total = 0.0;
  };
  const std::size_t ns = cfg.sigma_grid.size();
  const std::size_t nseed = static_cast<std::size_t>(cfg.sweep_seeds);
  std::vector<Cell> cells(ns * nseed);

  parallel_for(ns * nseed, cfg.jobs, [&](std::size_t slot) {
    const std::size_t si = slot / nseed;
    const std::size_t seed_idx = slot % nseed;
    const double sigma = cfg.sigma_grid[si];
    const std::uint64_t sub_seed =
        rng::derive_key(cfg.master_seed, "sweepseed", seed_idx);
    try {
      ExperimentConfig local = cfg;
      local.master_seed = sub_seed;
      local.jobs = 1;
      TrainConfig tc = local.train_config(rng::derive_key(sub_seed, "victim"));
      tc.mode = TrainMode::kDpSgd;
      tc.noise_multiplier = sigma;
      detail::VictimRun victim = detail::train_victim(local, tc);

      const DataSource source = local.source(rng::derive_key(sub_seed, "source"));
      const Dataset pool =
          draw(source, local.pool_size, rng::derive_key(sub_seed, "pool"));
      const EvalSplit eval_split =
          make_eval_split(victim.train_set, local.eval_members, source,
                          rng::derive_key(sub_seed, "fresh"),
                          rng::derive_key(sub_seed, "evalsel"));
      const AttackOutcome attack =
          run_attack(local.model, victim.outcome.params, tc, pool, eval_split,
                     local.attack, rng::derive_key(sub_seed, "attack"), 1);

      Cell& c = cells[slot];
      c.val_acc = victim.val_set.empty()
                      ? accuracy(local.model, victim.outcome.params, victim.train_set)
                      : accuracy(local.model, victim.outcome.params, victim.val_set);
      c.attack_accuracy = attack.attack_accuracy;
      const PrivacyBudget total = detail::ledger_total(victim.outcome.ledger);
      c.epsilon_total = total.epsilon;
      c.delta_total = total.delta;
    } catch (const NumericError& e) {
      throw NumericError("sweep_dpsgd sigma=" + format_double(sigma) +
                         " seed_index=" + std::to_string(seed_idx) + ": " +
                         e.what());
    }
  });

  Provenance prov = cfg.provenance();
  prov.extra = "accounting=naive-composition";
  CsvWriter runs(cfg.out_dir + "/sweep_dpsgd_runs.csv", prov,
                 {"sigma", "seed_index", "val_acc", "utility_loss",
                  "attack_accuracy"});
  CsvWriter agg(cfg.out_dir + "/sweep_dpsgd.csv", prov,
                {"sigma", "utility_loss", "epsilon", "delta",
                 "attack_accuracy"});

  json rows = json::array();
  for (std::size_t si = 0; si < ns; ++si) {
    std::vector<double> uls, accs;
    for (std::size_t seed_idx = 0; seed_idx < nseed; ++seed_idx) {
      const Cell& c = cells[si * nseed + seed_idx];
      const Cell& base = cells[0 * nseed + seed_idx];
      const double ul = utility_loss(base.val_acc, c.val_acc);
      uls.push_back(ul);
      accs.push_back(c.attack_accuracy);
      runs.write_row({format_double(cfg.sigma_grid[si]),
                      std::to_string(seed_idx), format_double(c.val_acc),
                      format_double(ul), format_double(c.attack_accuracy)});
    }
    const Cell& first = cells[si * nseed];
    json row;
    row["sigma"] = cfg.sigma_grid[si];
    row["utility_loss"] = detail::median(uls);
    row["attack_accuracy"] = detail::median(accs);
    row["epsilon"] = detail::epsilon_str(first.epsilon_total);
    row["delta"] = first.delta_total;
    rows.push_back(row);
    agg.write_row({format_double(cfg.sigma_grid[si]),
                   format_double(detail::median(uls)),
                   detail::epsilon_str(first.epsilon_total),
                   format_double(first.delta_total),
                   format_double(detail::median(accs))});
  }
  json report;
  report["rows"] = rows;
  detail::write_json(cfg.out_dir + "/sweep_dpsgd_report.json", report);
  return report;
}

// GPM sweep: one victim, one sensitivity estimate, then per sigma a set of
// perturbation seeds. Utility loss is the median over perturbation seeds;
// the attack is evaluated against the first perturbed deployment.
inline json run_sweep_gpm_experiment(const ExperimentConfig& cfg) {
  const TrainConfig tc =
      cfg.train_config(rng::derive_key(cfg.master_seed, "victim"));
  detail::VictimRun victim = detail::train_victim(cfg, tc);
  const DataSource source = cfg.source(rng::derive_key(cfg.master_seed, "source"));

  const SensitivityReport sens = sample_sensitivity(
      cfg.model, tc, source, static_cast<int>(cfg.train_size),
      cfg.sensitivity_samples, cfg.jobs);
  if (!sens.completed)
    throw NumericError("sensitivity sample " +
                       std::to_string(sens.failed_sample) + " diverged");

  const Dataset pool =
      draw(source, cfg.pool_size, rng::derive_key(cfg.master_seed, "pool"));
  const EvalSplit eval_split =
      make_eval_split(victim.train_set, cfg.eval_members, source,
                      rng::derive_key(cfg.master_seed, "fresh"),
                      rng::derive_key(cfg.master_seed, "evalsel"));

  // Shadows mimic the (undefended) victim pipeline once; each sigma is then
  // scored against the perturbed deployment.
  const ShadowSet shadows = train_shadow_models(
      cfg.model, tc, pool, cfg.attack.shadows, cfg.attack.shadow_train_size,
      rng::derive_key(cfg.master_seed, "attack"), cfg.jobs);
  const std::vector<AttackRecord> records = build_attack_dataset(
      shadows, pool, cfg.attack.attack_steps, rng::derive_key(cfg.master_seed, "attack"));
  const AttackClassifier clf = train_attack_classifier(
      records, cfg.attack.classifier_hidden, cfg.attack.classifier_train,
      rng::derive_key(rng::derive_key(cfg.master_seed, "attack"), "clf"));

  const double base_acc =
      victim.val_set.empty()
          ? accuracy(cfg.model, victim.outcome.params, victim.train_set)
          : accuracy(cfg.model, victim.outcome.params, victim.val_set);
  const Dataset& metric_set =
      victim.val_set.empty() ? victim.train_set : victim.val_set;

  const std::size_t ns = cfg.sigma_grid.size();
  const std::size_t np = static_cast<std::size_t>(cfg.gpm_perturbation_seeds);
  std::vector<double> accs(ns * np, 0.0);
  std::vector<double> attack_accs(ns, 0.0);
  parallel_for(ns, cfg.jobs, [&](std::size_t si) {
    const double sigma = cfg.sigma_grid[si];
    for (std::size_t p = 0; p < np; ++p) {
      const GpmDeployment d =
          gpm_deploy(cfg.model, victim.outcome.params, sigma,
                     rng::derive_key(cfg.master_seed, "gpmseed", p));
      accs[si * np + p] = accuracy(cfg.model, d.perturbed, metric_set);
      if (p == 0)
        attack_accs[si] = evaluate_attack(clf, cfg.model, d.perturbed,
                                          eval_split, cfg.attack.attack_steps);
    }
  });

  Provenance prov = cfg.provenance();
  CsvWriter runs(cfg.out_dir + "/sweep_gpm_runs.csv", prov,
                 {"sigma", "perturbation_seed", "val_acc", "utility_loss"});
  CsvWriter agg(cfg.out_dir + "/sweep_gpm.csv", prov,
                {"sigma", "utility_loss", "epsilon", "delta", "gamma",
                 "attack_accuracy"});
  const double gamma = rdp_confidence(cfg.sensitivity_samples).gamma;
  json rows = json::array();
  for (std::size_t si = 0; si < ns; ++si) {
    std::vector<double> uls;
    for (std::size_t p = 0; p < np; ++p) {
      const double ul = utility_loss(base_acc, accs[si * np + p]);
      uls.push_back(ul);
      runs.write_row({format_double(cfg.sigma_grid[si]), std::to_string(p),
                      format_double(accs[si * np + p]), format_double(ul)});
    }
    const double sigma = cfg.sigma_grid[si];
    double eps;
    if (sigma > 0.0) {
      eps = gpm_certificate(sens.s_bar, cfg.sensitivity_samples, sigma,
                            cfg.delta_target)
                .epsilon;
    } else {
      eps = std::numeric_limits<double>::infinity();
    }
    json row;
    row["sigma"] = sigma;
    row["utility_loss"] = detail::median(uls);
    row["epsilon"] = detail::epsilon_str(eps);
    row["delta"] = cfg.delta_target;
    row["gamma"] = gamma;
    row["attack_accuracy"] = attack_accs[si];
    rows.push_back(row);
    agg.write_row({format_double(sigma), format_double(detail::median(uls)),
                   detail::epsilon_str(eps), format_double(cfg.delta_target),
                   format_double(gamma), format_double(attack_accs[si])});
  }
  json report;
  report["S_bar"] = sens.s_bar;
  report["rows"] = rows;
  detail::write_json(cfg.out_dir + "/sweep_gpm_report.json", report);
  return report;
}

// Dispatch. Creates the output directory; throws ConfigError / NumericError
// / IoError, which the CLI maps to exit codes 2 / 3 / 4.
inline json run_experiment(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

  if (cfg.experiment == "data") return run_data_experiment(cfg);
  if (cfg.experiment == "train") return run_train_experiment(cfg);
  if (cfg.experiment == "attack") return run_attack_experiment(cfg);
  if (cfg.experiment == "scatter") return run_scatter_experiment(cfg);
  if (cfg.experiment == "memorization") return run_memorization_experiment(cfg);
  if (cfg.experiment == "sensitivity") return run_sensitivity_experiment(cfg);
  if (cfg.experiment == "account") return run_account_experiment(cfg);
  if (cfg.experiment == "sweep_dpsgd") return run_sweep_dpsgd_experiment(cfg);
  if (cfg.experiment == "sweep_gpm") return run_sweep_gpm_experiment(cfg);
  throw ConfigError("experiment: unknown value '" + cfg.experiment + "'");
}

}  // namespace privaudit

#endif  // PRIVAUDIT_EXPERIMENTS_HPP
