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
// privaudit: train tiny classifiers, attack them with shadow-model
// membership inference, defend them with regularization / DP-SGD / a
// post-training Gaussian parameter release, and account for the privacy
// budget. Experiments are JSON-config driven and fully reproducible from
// the master seed.
//
// Exit codes: 0 success, 2 config/schema violation, 3 numeric divergence,
// 4 I/O failure.

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "privaudit/privaudit.hpp"

namespace {

using privaudit::json;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* c = cmd->add_option("--config", flags.config_path,
                            "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&flags](std::uint64_t v) { flags.seed = v; },
      "override master seed");
  cmd->add_option_function<int>(
      "--jobs", [&flags](int v) { flags.jobs = v; },
      "parallel workers (outputs are identical for any value)");
}

std::string resolve_out_dir(const std::string& flag_value,
                            const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("PRIVAUDIT_OUT"); env && *env) return env;
  if (!config_value.empty()) return config_value;
  return "out";
}

int run_config_experiment(const std::string& experiment, const CommonFlags& flags) {
  std::ifstream f(flags.config_path);
  if (!f) throw privaudit::IoError("cannot open config: " + flags.config_path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw privaudit::ConfigError("config is not valid JSON: " +
                                 std::string(e.what()));
  }
  if (!j.is_object()) throw privaudit::ConfigError("config: must be a JSON object");
  if (j.contains("experiment")) {
    const std::string in_config = j.at("experiment").get<std::string>();
    if (in_config != experiment)
      throw privaudit::ConfigError("experiment: config says '" + in_config +
                                   "' but subcommand is '" + experiment + "'");
  } else {
    j["experiment"] = experiment;
  }
  if (flags.seed) j["master_seed"] = *flags.seed;
  if (flags.jobs) j["jobs"] = *flags.jobs;

  privaudit::ExperimentConfig cfg = privaudit::parse_experiment_config(j);
  cfg.out_dir = resolve_out_dir(flags.out_dir, cfg.out_dir);
  const json summary = privaudit::run_experiment(cfg);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int run_gpm(const std::string& params_path, double sigma, std::uint64_t seed,
            const std::string& queries_path, const std::string& out_dir,
            double s_bar, std::int64_t samples, double delta,
            double analytic_bound) {
  auto [spec, params] = privaudit::load_params(params_path);
  const privaudit::GpmDeployment deployment =
      privaudit::gpm_deploy(spec, params, sigma, seed);
  std::cerr << "note: each deployment is one release; re-deploying with a new "
               "seed composes budgets (k releases -> (k*eps, k*delta))\n";

  const std::vector<privaudit::Example> queries =
      privaudit::load_queries(queries_path, spec);
  const std::vector<privaudit::ConfidenceVector> responses =
      privaudit::gpm_respond(deployment, queries);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw privaudit::IoError("cannot create output directory: " + out_dir);

  privaudit::Provenance prov;
  prov.master_seed = seed;
  prov.extra = "sigma=" + privaudit::format_double(sigma);
  std::vector<std::string> cols;
  const int m = spec.classes();
  for (int c = 0; c < m; ++c) cols.push_back("p" + std::to_string(c));
  privaudit::CsvWriter w(out_dir + "/responses.csv", prov, cols);
  for (const auto& p : responses) {
    std::vector<std::string> row;
    row.reserve(p.size());
    for (double v : p) row.push_back(privaudit::format_double(v));
    w.write_row(row);
  }

  privaudit::RandomDpCertificate cert;
  if (analytic_bound > 0.0) {
    cert = privaudit::gpm_certificate_analytic(analytic_bound, sigma, delta);
  } else {
    if (s_bar < 0.0)
      throw privaudit::ConfigError("gpm: provide --sensitivity (with --samples) "
                                   "or --bound for the certificate");
    cert = privaudit::gpm_certificate(s_bar, samples, sigma, delta);
  }
  if (cert.degenerate)
    std::cerr << "warning: zero sensitivity; certificate is degenerate "
                 "(epsilon = 0 from a data-independent trainer)\n";
  std::ofstream cf(out_dir + "/certificate.json",
                   std::ios::binary | std::ios::trunc);
  if (!cf) throw privaudit::IoError("cannot write certificate.json");
  cf << privaudit::to_json(cert).dump(2) << '\n';
  std::cout << privaudit::to_json(cert).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privaudit: a desk-scale membership-inference and "
               "differential-privacy audit toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", privaudit::kVersion);

  // data: generate via config, or load and summarize an existing CSV.
  {
    CLI::App* cmd = app.add_subcommand(
        "data", "generate a synthetic dataset CSV, or inspect one with --load");
    auto flags = std::make_shared<CommonFlags>();
    auto load_path = std::make_shared<std::string>();
    cmd->add_option("--config", flags->config_path, "experiment config (JSON)");
    cmd->add_option("--out", flags->out_dir, "output directory");
    cmd->add_option("--load", *load_path, "load a dataset CSV and print a summary");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [flags](std::uint64_t v) { flags->seed = v; },
        "override master seed");
    cmd->callback([flags, load_path] {
      if (!load_path->empty()) {
        const privaudit::LoadedDataset loaded = privaudit::load_dataset(*load_path);
        json summary;
        summary["rows"] = loaded.data.size();
        summary["kind"] = loaded.kind == privaudit::SourceKind::kGaussianBlobs
                              ? "gaussian_blobs"
                              : "synthetic_sequences";
        summary["feature_dim"] = loaded.feature_dim;
        std::map<int, std::size_t> histogram;
        for (const auto& ex : loaded.data) ++histogram[ex.label];
        json hist = json::object();
        for (const auto& [label, count] : histogram)
          hist[std::to_string(label)] = count;
        summary["label_histogram"] = hist;
        std::cout << summary.dump(2) << '\n';
        return;
      }
      if (flags->config_path.empty())
        throw privaudit::ConfigError("data: provide --config or --load");
      const int rc = run_config_experiment("data", *flags);
      if (rc != 0) throw CLI::RuntimeError(rc);
    });
  }

  // Config-driven experiment subcommands.
  struct SubDef {
    const char* name;
    const char* experiment;
    const char* help;
  };
  static const SubDef kSubs[] = {
      {"train", "train", "train one model; emits trace.csv, model.paud, report"},
      {"attack", "attack", "shadow-model membership inference attack"},
      {"scatter", "scatter", "attack plus per-query entropy/loss table"},
      {"memorization", "memorization",
       "sequential-batch training and per-batch attack accuracy"},
      {"sensitivity", "sensitivity", "empirical sensitivity sampling"},
      {"account", "account", "(sigma, epsilon) table at fixed delta"},
      {"sweep-dpsgd", "sweep_dpsgd", "DP-SGD privacy/utility sweep"},
      {"sweep-gpm", "sweep_gpm", "post-training Gaussian release sweep"},
  };
  std::vector<std::pair<std::string, CommonFlags>> pending;
  pending.reserve(std::size(kSubs));
  for (const SubDef& def : kSubs) {
    CLI::App* cmd = app.add_subcommand(def.name, def.help);
    pending.emplace_back(def.experiment, CommonFlags{});
    add_common(cmd, pending.back().second, /*config_required=*/true);
    CommonFlags* flags = &pending.back().second;
    const std::string experiment = def.experiment;
    cmd->callback([experiment, flags] {
      const int rc = run_config_experiment(experiment, *flags);
      if (rc != 0) throw CLI::RuntimeError(rc);
    });
  }

  // gpm: flag-driven release of a saved parameter snapshot.
  {
    CLI::App* cmd = app.add_subcommand(
        "gpm", "perturb a trained snapshot once and answer queries with it");
    auto params_path = std::make_shared<std::string>();
    auto queries_path = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>("out");
    auto sigma = std::make_shared<double>(0.0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto s_bar = std::make_shared<double>(-1.0);
    auto samples = std::make_shared<std::int64_t>(500);
    auto delta = std::make_shared<double>(1e-4);
    auto bound = std::make_shared<double>(0.0);
    cmd->add_option("--params", *params_path, "parameter snapshot (.paud)")->required();
    cmd->add_option("--queries", *queries_path, "query CSV")->required();
    cmd->add_option("--sigma", *sigma, "noise std per coordinate")->required();
    cmd->add_option("--gpm-seed", *seed, "perturbation seed");
    cmd->add_option("--out", *out_dir, "output directory");
    cmd->add_option("--sensitivity", *s_bar,
                    "empirical sensitivity S_bar for the certificate");
    cmd->add_option("--samples", *samples, "sensitivity sample count n");
    cmd->add_option("--delta", *delta, "certificate delta target");
    cmd->add_option("--bound", *bound,
                    "analytic sensitivity bound (standard-DP certificate)");
    cmd->callback([=] {
      std::string dir = *out_dir;
      if (const char* env = std::getenv("PRIVAUDIT_OUT"); env && *env) dir = env;
      const int rc = run_gpm(*params_path, *sigma, *seed, *queries_path, dir,
                             *s_bar, *samples, *delta, *bound);
      if (rc != 0) throw CLI::RuntimeError(rc);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const privaudit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const privaudit::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const privaudit::InvariantError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const privaudit::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const privaudit::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
