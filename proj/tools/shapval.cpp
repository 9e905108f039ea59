// Copyright 2026 The shapval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: computes exact or approximate data valuations for
// a coalition game given as an explicit utility table or as a generated
// federated regression scenario, and drives batch experiments.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapval/shapval.hpp"

namespace {

struct GameFlags {
  std::string table_path;
  std::string scenario_name;
  int n = 0;
  int t = 0;
  int d = 0;
  double sigma = 0.1;
  double noise_level = 0.0;
  std::vector<int> null_clients;       // 1-based from the flag
  std::vector<std::string> duplicates; // "src:tgt", 1-based
};

struct RunFlags {
  std::uint64_t seed = 0;
  int repeats = 1;
  std::string out_dir;
};

void add_game_flags(CLI::App* cmd, GameFlags& game) {
  cmd->add_option("--table", game.table_path, "Path to a utility table JSON file");
  cmd->add_option("--scenario", game.scenario_name,
                  "Scenario name (same_size_same_dist, same_size_diff_dist, "
                  "diff_size_same_dist, same_size_noisy_label, same_size_noisy_feature)");
  cmd->add_option("-n,--clients", game.n, "Number of clients (scenario games)");
  cmd->add_option("-t,--samples", game.t, "Per-client sample count (scenario games)");
  cmd->add_option("-d,--features", game.d, "Feature dimension (scenario games)");
  cmd->add_option("--sigma", game.sigma, "Training label noise (default 0.1)");
  cmd->add_option("--noise-level", game.noise_level, "Corruption level in [0,1] (default 0)");
  cmd->add_option("--null", game.null_clients, "1-based id of a client stripped of data")
      ->delimiter(',');
  cmd->add_option("--dup", game.duplicates,
                  "Duplicate shard as src:tgt (1-based), e.g. --dup 1:2")
      ->delimiter(',');
}

void add_run_flags(CLI::App* cmd, RunFlags& run) {
  cmd->add_option("--seed", run.seed, "Base seed (default 0)");
  cmd->add_option("--repeats", run.repeats, "Independent repeats (default 1)");
  cmd->add_option("--out", run.out_dir, "Directory for output files");
}

shapval::ExperimentConfig make_config(const GameFlags& game, const RunFlags& run) {
  shapval::ExperimentConfig config;
  if (!game.table_path.empty()) config.table_path = game.table_path;
  if (!game.scenario_name.empty()) {
    shapval::ScenarioConfig sc;
    sc.kind = shapval::parse_scenario_name(game.scenario_name);
    sc.n = game.n;
    sc.t = game.t;
    sc.d = game.d;
    sc.sigma = game.sigma;
    sc.noise_level = game.noise_level;
    sc.validate();
    config.scenario = sc;
  }
  for (int c : game.null_clients) {
    if (c < 1) throw shapval::ConfigError("--null takes 1-based client ids");
    config.null_clients.push_back(c - 1);
  }
  for (const std::string& pair : game.duplicates) {
    auto colon = pair.find(':');
    if (colon == std::string::npos) {
      throw shapval::ConfigError("--dup expects src:tgt, got \"" + pair + "\"");
    }
    int src = 0, tgt = 0;
    try {
      src = std::stoi(pair.substr(0, colon));
      tgt = std::stoi(pair.substr(colon + 1));
    } catch (const std::exception&) {
      throw shapval::ConfigError("--dup expects src:tgt integers, got \"" + pair + "\"");
    }
    if (src < 1 || tgt < 1) throw shapval::ConfigError("--dup takes 1-based client ids");
    config.duplicate_pairs.emplace_back(src - 1, tgt - 1);
  }
  config.repeats = run.repeats;
  config.seed = run.seed;
  config.out_dir = run.out_dir;
  return config;
}

/// Runs one method spec per the flags and prints the valuation JSON (or an
/// array of runs when --repeats > 1).
int run_single(shapval::ExperimentConfig config, const shapval::MethodSpec& spec) {
  if (config.repeats < 1) throw shapval::ConfigError("--repeats must be >= 1");
  config.methods = {spec};  // build_oracle validates the full config
  std::shared_ptr<const shapval::UtilityOracle> inner = shapval::build_oracle(config);
  std::vector<shapval::Valuation> runs;
  for (int r = 0; r < config.repeats; ++r) {
    std::uint64_t stream =
        shapval::derive_seed(config.seed, spec.display(), static_cast<std::uint64_t>(r));
    runs.push_back(shapval::run_method(inner, spec, stream));
  }
  nlohmann::ordered_json out;
  if (config.repeats == 1) {
    out = shapval::valuation_to_json(runs.front());
  } else {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : runs) arr.push_back(shapval::valuation_to_json(v));
    out["runs"] = std::move(arr);
  }
  std::cout << out.dump(2) << '\n';
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream file(std::filesystem::path(config.out_dir) / "valuation.json");
    if (!file) throw std::runtime_error("cannot write valuation.json in " + config.out_dir);
    file << out.dump(2) << '\n';
  }
  return 0;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("SHAPVAL_SEED");
  if (raw == nullptr) return std::nullopt;
  std::string text(raw);
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw shapval::ConfigError("SHAPVAL_SEED must be a non-negative integer, got \"" + text +
                               "\"");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw shapval::ConfigError("SHAPVAL_SEED does not fit in 64 bits: \"" + text + "\"");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley-style data valuation for simulated federated learning"};
  app.require_subcommand(1);

  GameFlags game;
  RunFlags run;
  std::string form = "mc";
  std::string scheme_text;
  std::uint64_t gamma = 0;
  std::vector<std::uint64_t> plan_counts;
  int K = 0;
  bool printed_denominator = false;
  std::uint64_t rounds = 0;
  double trunc_tol = -1.0;  // sentinel: auto
  std::string config_path;
  std::vector<std::uint64_t> gammas;

  CLI::App* exact = app.add_subcommand("exact", "Exact Shapley values (full enumeration)");
  add_game_flags(exact, game);
  add_run_flags(exact, run);
  exact->add_option("--form", form, "Reduction: mc, cc, or perm (default mc)");

  CLI::App* sample = app.add_subcommand("sample", "Stratified whole-coalition sampling");
  add_game_flags(sample, game);
  add_run_flags(sample, run);
  sample->add_option("--scheme", scheme_text, "Pairing scheme: mc or cc")->required();
  sample->add_option("--gamma", gamma, "Sampling budget (even split across strata)");
  sample->add_option("--plan", plan_counts, "Explicit per-stratum counts, e.g. 2,2,1")
      ->delimiter(',');

  CLI::App* kgreedy = app.add_subcommand("kgreedy", "Small-coalition truncation at depth K");
  add_game_flags(kgreedy, game);
  add_run_flags(kgreedy, run);
  kgreedy->add_option("-K,--depth", K, "Largest coalition size to enumerate")->required();
  kgreedy->add_flag("--printed-denominator", printed_denominator,
                    "Weight stratum k by C(n,k) instead of C(n-1,k)");

  CLI::App* ipss = app.add_subcommand(
      "ipss", "Progressive stratum sampling under a hard evaluation budget");
  add_game_flags(ipss, game);
  add_run_flags(ipss, run);
  ipss->add_option("--gamma", gamma, "Total evaluation budget (>= n+1)")->required();

  CLI::App* tmc = app.add_subcommand("tmc", "Truncated permutation-walk sampling");
  add_game_flags(tmc, game);
  add_run_flags(tmc, run);
  tmc->add_option("--rounds", rounds, "Number of permutation walks")->required();
  tmc->add_option("--trunc-tol", trunc_tol,
                  "Truncation tolerance (default: 0.001 * |U(grand)|)");

  CLI::App* ccshap = app.add_subcommand(
      "ccshapley", "Complement-pairing baseline under an even-split plan");
  add_game_flags(ccshap, game);
  add_run_flags(ccshap, run);
  ccshap->add_option("--gamma", gamma, "Sampling budget")->required();

  CLI::App* experiment = app.add_subcommand("experiment", "Run a JSON-configured experiment");
  experiment->add_option("--config", config_path, "Experiment config JSON")->required();
  experiment->add_option("--out", run.out_dir, "Override the config's output directory");

  CLI::App* pareto = app.add_subcommand("pareto", "Accuracy/cost sweep over budgets");
  pareto->add_option("--config", config_path, "Experiment config JSON")->required();
  pareto->add_option("--gammas", gammas, "Budgets to sweep, e.g. 8,16,32")
      ->required()
      ->delimiter(',');
  pareto->add_option("--out", run.out_dir, "Override the config's output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    std::optional<std::uint64_t> env_seed = seed_from_env();
    if (env_seed) run.seed = *env_seed;

    if (experiment->parsed() || pareto->parsed()) {
      shapval::ExperimentConfig config = shapval::load_experiment_config(config_path);
      if (env_seed) config.seed = *env_seed;
      if (!run.out_dir.empty()) config.out_dir = run.out_dir;
      if (experiment->parsed()) {
        shapval::ExperimentReport report = shapval::run_experiment(config);
        std::cout << shapval::report_to_json(report).dump(2) << '\n';
      } else {
        std::vector<shapval::ParetoRow> rows = shapval::pareto_sweep(config, gammas);
        std::cout << shapval::pareto_to_csv(rows);
      }
      return 0;
    }

    shapval::ExperimentConfig config = make_config(game, run);
    shapval::MethodSpec spec;
    if (exact->parsed()) {
      if (form == "mc") {
        spec.name = "exact_mc";
      } else if (form == "cc") {
        spec.name = "exact_cc";
      } else if (form == "perm") {
        spec.name = "exact_perm";
      } else {
        throw shapval::ConfigError("--form must be mc, cc, or perm, got \"" + form + "\"");
      }
    } else if (sample->parsed()) {
      spec.name = "sample";
      spec.scheme = shapval::parse_scheme(scheme_text);
      bool has_gamma = sample->count("--gamma") > 0;
      bool has_plan = sample->count("--plan") > 0;
      if (has_gamma == has_plan) {
        throw shapval::ConfigError("sample: give exactly one of --gamma or --plan");
      }
      if (has_gamma) spec.gamma = gamma;
      if (has_plan) spec.plan_m = plan_counts;
    } else if (kgreedy->parsed()) {
      spec.name = "kgreedy";
      spec.K = K;
      spec.printed_denominator = printed_denominator;
    } else if (ipss->parsed()) {
      spec.name = "ipss";
      spec.gamma = gamma;
    } else if (tmc->parsed()) {
      spec.name = "tmc";
      spec.rounds = rounds;
      if (tmc->count("--trunc-tol") > 0) {
        if (trunc_tol < 0) throw shapval::ConfigError("--trunc-tol must be >= 0");
        spec.trunc_tol = trunc_tol;
      }
    } else {
      spec.name = "ccshapley";
      spec.gamma = gamma;
    }
    return run_single(config, spec);
  } catch (const shapval::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::length_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
