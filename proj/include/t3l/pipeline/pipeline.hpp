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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>

#include "json.hpp"
#include "t3l/data/corpus.hpp"
#include "t3l/metrics/metrics.hpp"
#include "t3l/models/mt_model.hpp"
#include "t3l/models/tc_model.hpp"
#include "t3l/training/trainer.hpp"

namespace t3l::pipeline {

// Fractions of layers frozen from the translator's input side and from the
// classifier's output side. ceil(fraction * layers) units are frozen.
struct FreezingPolicy {
  double mt_fraction = 0.5;
  double tc_fraction = 0.5;
  bool freeze_tc_head = false;
};

nlohmann::json to_json(const FreezingPolicy& p);
FreezingPolicy freezing_from_json(const nlohmann::json& j);

class T3lPipeline {
 public:
  // Throws unless both models share one vocabulary.
  T3lPipeline(models::MtModel mt, models::TcModel tc);

  models::MtModel& mt() { return mt_; }
  models::TcModel& tc() { return tc_; }
  const models::MtModel& mt() const { return mt_; }
  const models::TcModel& tc() const { return tc_; }
  const vocab::Vocabulary& vocabulary() const { return mt_.vocabulary(); }

  const FreezingPolicy& policy() const { return policy_; }
  std::size_t parameter_count() const;
  std::size_t trainable_parameter_count() const;

 private:
  friend void apply_freezing(T3lPipeline& pipeline, const FreezingPolicy& policy);

  models::MtModel mt_;
  models::TcModel tc_;
  FreezingPolicy policy_{0.0, 0.0, false};
};

// Resets every flag, then freezes the lowest translator layers (with the
// source embedding) and the highest classifier layers (and the head if asked).
void apply_freezing(T3lPipeline& pipeline, const FreezingPolicy& policy);

// Classifier logits for a target-language source through the soft path.
// With force_one_hot the translator's distributions are replaced by the
// indicator vectors of its greedy tokens.
nn::Var pipeline_logits(nn::Tape& tape, T3lPipeline& pipeline, std::span<const vocab::TokenId> source,
                        bool force_one_hot = false);
nn::Var pipeline_loss(nn::Tape& tape, T3lPipeline& pipeline, std::span<const vocab::TokenId> source,
                      const models::LabelSet& labels);

models::Prediction predict(T3lPipeline& pipeline, std::span<const vocab::TokenId> source, bool force_one_hot = false);
// Greedy tokens fed to the classifier's own lookup.
models::Prediction predict_hard(T3lPipeline& pipeline, std::span<const vocab::TokenId> source);

enum class Path { kSoft, kHard };

// Accuracy or mRP over `corpus`; `threads` copies of the pipeline share the work.
metrics::EvalReport evaluate_pipeline(const T3lPipeline& pipeline, const data::LabeledCorpus& corpus, Path path,
                                      std::size_t threads = 1);

// Batch-1 joint fine-tuning through the soft path. The starting parameters
// count as epoch 0 for best-on-selection, so the result never scores below
// them on the selection split.
class JointFinetuner {
 public:
  JointFinetuner(T3lPipeline& pipeline, training::TrainOptions options);

  training::TrainResult run(const data::LabeledCorpus& shots, const data::LabeledCorpus& selection);

 private:
  T3lPipeline& pipeline_;
  training::TrainOptions options_;
};

training::TrainResult finetune_end_to_end(T3lPipeline& pipeline, const data::LabeledCorpus& shots,
                                          const data::LabeledCorpus& selection,
                                          const training::TrainOptions& options);

// Greedy translation of each sentence, labels carried over.
data::LabeledCorpus translate_corpus(models::MtModel& translator, const data::LabeledCorpus& corpus);

// Direct-LM baseline: the classifier sees target-language tokens as they are.
metrics::EvalReport evaluate_lm_baseline(models::TcModel& classifier, const data::LabeledCorpus& corpus);

// Translates the high-resource splits with `reverse` and trains a fresh
// target-language classifier on them.
std::pair<models::TcModel, training::TrainResult> translate_and_train(models::MtModel& reverse,
                                                                      const data::LabeledCorpus& train,
                                                                      const data::LabeledCorpus& dev,
                                                                      const models::TcConfig& config,
                                                                      std::uint64_t seed,
                                                                      const training::TrainOptions& options);

models::MtModel load_mt(const std::filesystem::path& checkpoint, const vocab::Vocabulary& vocabulary);
models::TcModel load_tc(const std::filesystem::path& checkpoint, const vocab::Vocabulary& vocabulary);

// Directory with vocab.txt, mt.ckpt, tc.ckpt and pipeline.json.
void save_pipeline(const std::filesystem::path& dir, const T3lPipeline& pipeline, const nlohmann::json& metadata = {});
T3lPipeline load_pipeline(const std::filesystem::path& dir);

}  // namespace t3l::pipeline
