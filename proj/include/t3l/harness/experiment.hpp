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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "t3l/data/corpus.hpp"
#include "t3l/harness/config.hpp"
#include "t3l/harness/report.hpp"
#include "t3l/pipeline/pipeline.hpp"
#include "t3l/training/trainer.hpp"
#include "t3l/vocab/vocabulary.hpp"

namespace t3l::harness {

// Target-language side of one synthetic language.
struct LanguageData {
  data::ParallelCorpus parallel_train, parallel_dev, parallel_test;
  data::LabeledCorpus test, fewshot_small, fewshot_large, selection;

  const data::LabeledCorpus& fewshot(std::size_t k) const;
};

struct ExperimentData {
  vocab::Vocabulary vocabulary;
  data::LabeledCorpus hr_train, hr_dev, hr_test;
  LanguageData main;
  // The degraded language used by the BLEU sweep.
  LanguageData sweep;
};

// Which translator a training command produces.
enum class TranslatorRole {
  kForward,  // target -> high-resource, used by T3L
  kReverse,  // high-resource -> target, used by translate-and-train
  kSweep,    // forward on the sweep language, with intermediate snapshots
};

std::string role_directory(TranslatorRole role);

using Log = std::function<void(const std::string&)>;

class Runner {
 public:
  explicit Runner(ExperimentConfig config, Log log = {});

  const ExperimentConfig& config() const { return config_; }
  std::filesystem::path data_dir() const;
  std::filesystem::path seed_dir(std::uint64_t seed) const;
  std::filesystem::path report_dir() const;

  // Writes the dataset bundle and manifest.json. An existing data
  // directory is an error unless `force` is set.
  nlohmann::json gen_data(bool force);
  const ExperimentData& data();

  training::TrainResult train_translator(std::uint64_t seed, TranslatorRole role, bool resume = false);
  training::TrainResult train_classifier(std::uint64_t seed, bool resume = false);
  // Translate-and-train classifier; needs the reverse translator.
  training::TrainResult train_baseline(std::uint64_t seed);

  models::MtModel load_translator(std::uint64_t seed, TranslatorRole role);
  models::TcModel load_classifier(std::uint64_t seed);
  models::TcModel load_baseline(std::uint64_t seed);

  // Pipeline from the trained components with the configured freezing.
  pipeline::T3lPipeline assemble(std::uint64_t seed);
  // Joint fine-tuning on the k-shot pool; saved under seed-N/t3l-k.
  pipeline::T3lPipeline finetune(std::uint64_t seed, std::size_t k, training::TrainResult* result = nullptr);

  // Every requested (method, budget, seed) cell; writes run.json and run.csv.
  RunReport evaluate();
  // Re-aggregates the per-seed rows of an earlier evaluate().
  RunReport report();
  // gen_data, every component for every seed, then evaluate().
  RunReport run_all(bool force);
  // Uses every epoch-/step- checkpoint of the sweep translator; needs >= 3.
  SweepReport sweep_bleu(std::uint64_t seed);

 private:
  void log(const std::string& line) const;
  training::TrainOptions seeded(training::TrainOptions options, std::uint64_t seed) const;

  ExperimentConfig config_;
  Log log_;
  std::optional<ExperimentData> data_;
};

// Checkpoints of a training directory ordered by optimizer step.
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir);

std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace t3l::harness
