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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "t3l/models/mt_model.hpp"
#include "t3l/models/tc_model.hpp"
#include "t3l/pipeline/pipeline.hpp"
#include "t3l/synth/synthlang.hpp"
#include "t3l/training/trainer.hpp"

namespace t3l::harness {

inline const std::vector<std::string> kMethods = {"lm", "t3l_soft", "t3l_hard", "translate_train"};

struct SweepConfig {
  // Severity passed to degrade_language for the sweep language.
  double severity = 1.0;
  std::vector<std::size_t> budgets{0};
  // Optimizer steps with an intermediate translator snapshot, on top of
  // the untrained model and every epoch end.
  std::vector<std::size_t> snapshot_steps{20, 40, 80, 160, 320};
};

struct ExperimentConfig {
  std::filesystem::path output_dir = "t3l-run";
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t data_seed = 1;
  synth::LanguageSpec language;
  double severity = 0.0;
  synth::CorpusSizes parallel_sizes;
  synth::TaskSpec task;
  models::MtConfig mt;
  models::TcConfig tc;
  training::TrainOptions mt_training;
  training::TrainOptions tc_training;
  training::TrainOptions finetune;
  // Few-shot fine-tuning of the standalone classifiers (LM, translate-and-train).
  training::TrainOptions classifier_finetune;
  pipeline::FreezingPolicy freezing;
  std::vector<std::size_t> budgets{0, 10, 100};
  std::vector<std::string> methods = kMethods;
  SweepConfig sweep;
  std::size_t threads = 1;

  // The main experiment language after applying `severity`.
  synth::LanguageSpec effective_language() const;
  synth::LanguageSpec sweep_language() const;
};

ExperimentConfig default_config();

nlohmann::json to_json(const ExperimentConfig& c);
// Missing keys keep their defaults; unknown methods or budgets are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// T3L_OUTPUT_DIR and T3L_THREADS, when set, replace the matching fields.
void apply_env_overrides(ExperimentConfig& c);

}  // namespace t3l::harness
