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

#include "t3l/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "t3l/error.hpp"

namespace t3l::harness {

synth::LanguageSpec ExperimentConfig::effective_language() const {
  return synth::degrade_language(language, severity);
}

synth::LanguageSpec ExperimentConfig::sweep_language() const {
  return synth::degrade_language(language, sweep.severity);
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.language.reorder = 0.2;
  c.language.noise = 0.1;
  c.tc.num_labels = c.task.num_labels;
  c.tc.head = synth::head_kind(c.task);

  c.mt_training.epochs = 5;
  c.mt_training.optimizer.learning_rate = 2e-3;
  c.mt_training.optimizer.warmup_steps = 50;
  c.mt_training.optimizer.batch_size = 8;
  c.mt_training.optimizer.accumulation = 1;
  c.mt_training.validation_limit = 200;

  c.tc_training.epochs = 3;
  c.tc_training.optimizer.learning_rate = 1e-3;
  c.tc_training.optimizer.warmup_steps = 50;
  c.tc_training.optimizer.batch_size = 8;
  c.tc_training.optimizer.accumulation = 1;

  c.finetune.epochs = 10;
  c.finetune.optimizer.learning_rate = 1e-4;
  c.finetune.optimizer.warmup_steps = 0;
  c.finetune.optimizer.batch_size = 1;
  c.finetune.optimizer.accumulation = 1;

  c.classifier_finetune = c.finetune;
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"output_dir", c.output_dir.string()},
          {"seeds", c.seeds},
          {"data_seed", c.data_seed},
          {"language", synth::to_json(c.language)},
          {"severity", c.severity},
          {"parallel_sizes",
           {{"train", c.parallel_sizes.train}, {"dev", c.parallel_sizes.dev}, {"test", c.parallel_sizes.test}}},
          {"task", synth::to_json(c.task)},
          {"mt", models::to_json(c.mt)},
          {"tc", models::to_json(c.tc)},
          {"mt_training", training::to_json(c.mt_training)},
          {"tc_training", training::to_json(c.tc_training)},
          {"finetune", training::to_json(c.finetune)},
          {"classifier_finetune", training::to_json(c.classifier_finetune)},
          {"freezing", pipeline::to_json(c.freezing)},
          {"budgets", c.budgets},
          {"methods", c.methods},
          {"sweep",
           {{"severity", c.sweep.severity}, {"budgets", c.sweep.budgets}, {"snapshot_steps", c.sweep.snapshot_steps}}},
          {"threads", c.threads}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c = default_config();
  try {
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.seeds = j.value("seeds", c.seeds);
    c.data_seed = j.value("data_seed", c.data_seed);
    if (j.contains("language")) {
      // Language fields override the default noisy cipher field by field.
      nlohmann::json merged = synth::to_json(c.language);
      merged.update(j.at("language"));
      c.language = synth::language_from_json(merged);
    }
    c.severity = j.value("severity", c.severity);
    if (j.contains("parallel_sizes")) {
      const auto& s = j.at("parallel_sizes");
      c.parallel_sizes.train = s.value("train", c.parallel_sizes.train);
      c.parallel_sizes.dev = s.value("dev", c.parallel_sizes.dev);
      c.parallel_sizes.test = s.value("test", c.parallel_sizes.test);
    }
    if (j.contains("task")) c.task = synth::task_from_json(j.at("task"));
    if (j.contains("mt")) c.mt = models::mt_config_from_json(j.at("mt"));
    nlohmann::json tc = j.value("tc", nlohmann::json::object());
    c.tc = models::tc_config_from_json(tc);
    // The head always follows the task.
    c.tc.num_labels = c.task.num_labels;
    c.tc.head = synth::head_kind(c.task);
    if (j.contains("mt_training")) c.mt_training = training::train_options_from_json(j.at("mt_training"), c.mt_training);
    if (j.contains("tc_training")) c.tc_training = training::train_options_from_json(j.at("tc_training"), c.tc_training);
    if (j.contains("finetune")) c.finetune = training::train_options_from_json(j.at("finetune"), c.finetune);
    if (j.contains("classifier_finetune")) {
      c.classifier_finetune = training::train_options_from_json(j.at("classifier_finetune"), c.classifier_finetune);
    }
    if (j.contains("freezing")) c.freezing = pipeline::freezing_from_json(j.at("freezing"));
    c.budgets = j.value("budgets", c.budgets);
    c.methods = j.value("methods", c.methods);
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      c.sweep.severity = s.value("severity", c.sweep.severity);
      c.sweep.budgets = s.value("budgets", c.sweep.budgets);
      c.sweep.snapshot_steps = s.value("snapshot_steps", c.sweep.snapshot_steps);
    }
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kConfig, std::string("config: ") + e.what());
  }
  require(!c.seeds.empty(), ErrorCategory::kConfig, "config: at least one seed is required");
  for (const auto& m : c.methods) {
    require(std::find(kMethods.begin(), kMethods.end(), m) != kMethods.end(), ErrorCategory::kConfig,
            "config: unknown method '" + m + "'");
  }
  for (std::size_t k : c.budgets) {
    require(k == 0 || k == synth::kFewShotSmall || k == synth::kFewShotLarge, ErrorCategory::kConfig,
            "config: few-shot budget " + std::to_string(k) + " is not 0, 10 or 100");
  }
  for (std::size_t k : c.sweep.budgets) {
    require(k == 0 || k == synth::kFewShotSmall || k == synth::kFewShotLarge, ErrorCategory::kConfig,
            "config: sweep budget " + std::to_string(k) + " is not 0, 10 or 100");
  }
  require(c.severity >= 0.0 && c.severity <= 1.0 && c.sweep.severity >= 0.0 && c.sweep.severity <= 1.0,
          ErrorCategory::kConfig, "config: severities must be in [0, 1]");
  require(c.threads >= 1, ErrorCategory::kConfig, "config: threads must be >= 1");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kFormat, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_env_overrides(ExperimentConfig& c) {
  if (const char* dir = std::getenv("T3L_OUTPUT_DIR"); dir != nullptr && *dir != '\0') c.output_dir = dir;
  if (const char* threads = std::getenv("T3L_THREADS"); threads != nullptr && *threads != '\0') {
    char* end = nullptr;
    const long n = std::strtol(threads, &end, 10);
    require(end != threads && *end == '\0' && n >= 1, ErrorCategory::kConfig,
            std::string("T3L_THREADS must be a positive integer, got '") + threads + "'");
    c.threads = static_cast<std::size_t>(n);
  }
}

}  // namespace t3l::harness
