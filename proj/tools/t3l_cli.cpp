// Copyright 2026 The T3L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line experiment runner.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "t3l/error.hpp"
#include "t3l/harness/experiment.hpp"

namespace {

using t3l::harness::ExperimentConfig;
using t3l::harness::Runner;
using t3l::harness::TranslatorRole;

struct Options {
  std::string config_path;
  bool quiet = false;
  bool force = false;
  bool resume = false;
  bool reverse = false;
  bool sweep = false;
  std::optional<std::uint64_t> seed;
  std::size_t budget = 100;
};

std::vector<std::uint64_t> seeds_of(const Options& o, const ExperimentConfig& c) {
  if (o.seed) return {*o.seed};
  return c.seeds;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

int run(CLI::App& app, const Options& o) {
  ExperimentConfig config =
      o.config_path.empty() ? t3l::harness::default_config() : t3l::harness::load_config(o.config_path);
  t3l::harness::apply_env_overrides(config);
  t3l::harness::Log log;
  if (!o.quiet) log = [](const std::string& line) { std::cerr << line << '\n'; };
  Runner runner(config, log);
  const auto seeds = seeds_of(o, config);

  if (app.got_subcommand("gen-data")) {
    const auto manifest = runner.gen_data(o.force);
    std::cout << "wrote " << manifest.at("files").size() << " files to " << runner.data_dir().string() << '\n';
  } else if (app.got_subcommand("train-mt")) {
    const TranslatorRole role = o.reverse ? TranslatorRole::kReverse
                                : o.sweep ? TranslatorRole::kSweep
                                          : TranslatorRole::kForward;
    for (auto seed : seeds) print_json(t3l::training::to_json(runner.train_translator(seed, role, o.resume)));
  } else if (app.got_subcommand("train-tc")) {
    for (auto seed : seeds) print_json(t3l::training::to_json(runner.train_classifier(seed, o.resume)));
  } else if (app.got_subcommand("train-baseline")) {
    for (auto seed : seeds) print_json(t3l::training::to_json(runner.train_baseline(seed)));
  } else if (app.got_subcommand("finetune")) {
    for (auto seed : seeds) {
      t3l::training::TrainResult result;
      runner.finetune(seed, o.budget, &result);
      print_json(t3l::training::to_json(result));
    }
  } else if (app.got_subcommand("evaluate")) {
    const auto report = runner.evaluate();
    std::cout << "metric " << report.metric << '\n';
    for (const auto& a : report.averages()) {
      std::cout << a.method << " k=" << a.budget << " mean " << a.mean << " over " << a.seeds << " seeds\n";
    }
    for (const auto& d : report.soft_hard_deltas()) {
      if (d.seed == 0) std::cout << "soft-hard delta k=" << d.budget << " " << d.delta << '\n';
    }
  } else if (app.got_subcommand("sweep-bleu")) {
    for (auto seed : seeds) {
      const auto report = runner.sweep_bleu(seed);
      for (const auto& p : report.points) {
        std::cout << p.checkpoint << " bleu " << p.bleu;
        for (const auto& [k, v] : p.metric) std::cout << " k" << k << " " << v;
        std::cout << '\n';
      }
      for (std::size_t k : config.sweep.budgets) {
        std::cout << "seed " << seed << " spearman k=" << k << " " << report.rank_correlation(k) << '\n';
      }
    }
  } else if (app.got_subcommand("report")) {
    const auto report = runner.report();
    for (const auto& a : report.averages()) {
      std::cout << a.method << " k=" << a.budget << " mean " << a.mean << " over " << a.seeds << " seeds\n";
    }
  } else if (app.got_subcommand("run")) {
    const auto report = runner.run_all(o.force);
    for (const auto& a : report.averages()) {
      std::cout << a.method << " k=" << a.budget << " mean " << a.mean << " over " << a.seeds << " seeds\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"T3L experiment harness"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config_path, "Experiment config (JSON); defaults apply when omitted");
  app.add_flag("-q,--quiet", o.quiet, "Suppress progress output");

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic dataset bundle");
  gen->add_flag("--force", o.force, "Overwrite an existing data directory");
  auto* mt = app.add_subcommand("train-mt", "Train a translator");
  mt->add_option("--seed", o.seed, "Single seed (default: every configured seed)");
  auto* rev = mt->add_flag("--reverse", o.reverse, "Train the high-resource to target translator");
  mt->add_flag("--sweep", o.sweep, "Train on the degraded sweep language, keeping snapshots")->excludes(rev);
  mt->add_flag("--resume", o.resume, "Continue from the latest epoch checkpoint");
  auto* tc = app.add_subcommand("train-tc", "Train the high-resource classifier");
  tc->add_option("--seed", o.seed, "Single seed");
  tc->add_flag("--resume", o.resume, "Continue from the latest epoch checkpoint");
  auto* base = app.add_subcommand("train-baseline", "Train the translate-and-train classifier");
  base->add_option("--seed", o.seed, "Single seed");
  auto* ft = app.add_subcommand("finetune", "Joint few-shot fine-tuning of the pipeline");
  ft->add_option("--seed", o.seed, "Single seed");
  ft->add_option("--budget", o.budget, "Few-shot budget (10 or 100)")->check(CLI::IsMember({10, 100}));
  app.add_subcommand("evaluate", "Run the method x budget x seed matrix");
  auto* sweep = app.add_subcommand("sweep-bleu", "BLEU versus downstream accuracy over translator checkpoints");
  sweep->add_option("--seed", o.seed, "Single seed");
  app.add_subcommand("report", "Re-aggregate an earlier evaluation");
  auto* all = app.add_subcommand("run", "gen-data, training and evaluate in one go");
  all->add_flag("--force", o.force, "Overwrite an existing data directory");

  CLI11_PARSE(app, argc, argv);
  try {
    return run(app, o);
  } catch (const t3l::Error& e) {
    std::cerr << nlohmann::json{{"error", {{"category", std::string(t3l::category_name(e.category()))},
                                           {"code", static_cast<int>(e.category())},
                                           {"message", e.what()}}}}.dump()
              << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"category", "internal"}, {"code", 1}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  }
}
