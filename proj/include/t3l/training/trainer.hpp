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
#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "t3l/data/corpus.hpp"
#include "t3l/metrics/metrics.hpp"
#include "t3l/models/mt_model.hpp"
#include "t3l/models/tc_model.hpp"
#include "t3l/nn/optim.hpp"

namespace t3l::training {

struct TrainOptions {
  nn::AdamWConfig optimizer;
  std::size_t epochs = 10;
  // Drives the per-epoch shuffle and the dropout stream.
  std::uint64_t seed = 1;
  // Caps the validation set (0 = use all of it).
  std::size_t validation_limit = 0;
  // Optimizer steps at which to keep extra snapshots (step-N.ckpt on disk).
  std::vector<std::size_t> snapshot_steps;
  // When set: epoch-K.ckpt per epoch, best.ckpt, history.json.
  std::optional<std::filesystem::path> checkpoint_dir;
  // Resume from an epoch checkpoint written by an earlier run.
  std::optional<std::filesystem::path> resume_from;
  std::function<void(const std::string&)> log;
};

nlohmann::json to_json(const TrainOptions& o);
// Reads epochs/seed/validation_limit/snapshot_steps and the optimizer fields.
TrainOptions train_options_from_json(const nlohmann::json& j, TrainOptions base = {});

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation = 0.0;
  std::size_t optimizer_steps = 0;
};

struct Snapshot {
  std::size_t optimizer_steps = 0;
  std::size_t epoch = 0;  // 0 for the untrained model
  nn::ParameterSet params;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  // 0 means the starting parameters were never beaten.
  std::size_t best_epoch = 0;
  double best_validation = 0.0;
  double initial_validation = 0.0;
  // Starting parameters, the requested steps and every epoch end.
  std::vector<Snapshot> snapshots;
};

nlohmann::json to_json(const TrainResult& r);

// Greedy-decode BLEU of `model` against the high-resource side.
metrics::BleuScore validation_bleu(models::MtModel& model, const data::ParallelCorpus& corpus,
                                   std::size_t limit = 0);

// Teacher-forced training; the model ends on its best-validation-BLEU parameters.
TrainResult train_mt(models::MtModel& model, const data::ParallelCorpus& train, const data::ParallelCorpus& dev,
                     const TrainOptions& options);

// Classifier input ids: the sentence followed by EOS, matching what the
// translator emits.
std::vector<vocab::TokenId> classifier_ids(const vocab::Vocabulary& vocab, const vocab::Sentence& text);

metrics::MetricKind metric_for(models::HeadKind head);

// Accuracy (multi-class) or mRP (multi-label) of token-path classification.
metrics::EvalReport evaluate_classifier(models::TcModel& model, const data::LabeledCorpus& corpus,
                                        std::size_t limit = 0);

// CE or BCE training; the model ends on its best-validation parameters.
TrainResult train_tc(models::TcModel& model, const data::LabeledCorpus& train, const data::LabeledCorpus& dev,
                     const TrainOptions& options);

}  // namespace t3l::training
