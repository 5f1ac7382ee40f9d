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

#include "t3l/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>

#include "t3l/error.hpp"
#include "t3l/nn/checkpoint.hpp"
#include "t3l/nn/ops.hpp"

namespace t3l::training {

namespace fs = std::filesystem;

nlohmann::json to_json(const TrainOptions& o) {
  const auto& a = o.optimizer;
  return {{"epochs", o.epochs},
          {"seed", o.seed},
          {"validation_limit", o.validation_limit},
          {"snapshot_steps", o.snapshot_steps},
          {"learning_rate", a.learning_rate},
          {"beta1", a.beta1},
          {"beta2", a.beta2},
          {"epsilon", a.epsilon},
          {"weight_decay", a.weight_decay},
          {"warmup_steps", a.warmup_steps},
          {"max_grad_norm", a.max_grad_norm},
          {"accumulation", a.accumulation},
          {"batch_size", a.batch_size}};
}

TrainOptions train_options_from_json(const nlohmann::json& j, TrainOptions base) {
  base.epochs = j.value("epochs", base.epochs);
  base.seed = j.value("seed", base.seed);
  base.validation_limit = j.value("validation_limit", base.validation_limit);
  base.snapshot_steps = j.value("snapshot_steps", base.snapshot_steps);
  auto& a = base.optimizer;
  a.learning_rate = j.value("learning_rate", a.learning_rate);
  a.beta1 = j.value("beta1", a.beta1);
  a.beta2 = j.value("beta2", a.beta2);
  a.epsilon = j.value("epsilon", a.epsilon);
  a.weight_decay = j.value("weight_decay", a.weight_decay);
  a.warmup_steps = j.value("warmup_steps", a.warmup_steps);
  a.max_grad_norm = j.value("max_grad_norm", a.max_grad_norm);
  a.accumulation = j.value("accumulation", a.accumulation);
  a.batch_size = j.value("batch_size", a.batch_size);
  require(a.batch_size >= 1 && a.accumulation >= 1, ErrorCategory::kConfig,
          "training: batch_size and accumulation must be >= 1");
  return base;
}

nlohmann::json to_json(const TrainResult& r) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : r.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"validation", e.validation},
                       {"optimizer_steps", e.optimizer_steps}});
  }
  return {{"history", history},
          {"best_epoch", r.best_epoch},
          {"best_validation", r.best_validation},
          {"initial_validation", r.initial_validation}};
}

namespace {

std::vector<EpochRecord> history_from_json(const nlohmann::json& j) {
  std::vector<EpochRecord> out;
  for (const auto& e : j) {
    out.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                   e.at("validation").get<double>(), e.at("optimizer_steps").get<std::size_t>()});
  }
  return out;
}

struct Loop {
  nn::ParameterSet& params;
  std::size_t samples;
  // Builds the loss of sample i on the tape.
  std::function<nn::Var(nn::Tape&, std::size_t)> loss;
  std::function<double()> validate;
  std::function<void(bool, std::uint64_t)> set_training;
  std::string kind;
  nlohmann::json metadata;
};

void log_line(const TrainOptions& o, const std::string& line) {
  if (o.log) o.log(line);
}

fs::path epoch_path(const fs::path& dir, std::size_t epoch) {
  return dir / ("epoch-" + std::to_string(epoch) + ".ckpt");
}

TrainResult run(Loop loop, const TrainOptions& options) {
  require(loop.samples > 0, ErrorCategory::kInvalidArgument, loop.kind + " training: empty training corpus");
  require(options.epochs >= 1, ErrorCategory::kConfig, loop.kind + " training: epochs must be >= 1");
  std::vector<nn::Parameter*> pointers;
  for (auto& p : loop.params) pointers.push_back(&p);
  nn::AdamW optimizer(options.optimizer, pointers);
  const std::size_t batch = options.optimizer.batch_size;
  const std::size_t accumulation = options.optimizer.accumulation;

  TrainResult result;
  nn::ParameterSet best = loop.params;
  std::size_t start_epoch = 1;
  const auto metadata_for = [&](std::size_t epoch) {
    nlohmann::json m = loop.metadata;
    m["epoch"] = epoch;
    m["training"] = to_json(options);
    m["result"] = to_json(result);
    return m;
  };

  if (options.resume_from) {
    const nn::Checkpoint ck = nn::load_checkpoint(*options.resume_from);
    require(ck.kind == loop.kind, ErrorCategory::kFormat,
            "resume: checkpoint kind '" + ck.kind + "' is not '" + loop.kind + "'");
    require(ck.optimizer.has_value(), ErrorCategory::kFormat, "resume: checkpoint has no optimizer state");
    nn::restore_parameters(loop.params, ck.params);
    optimizer.load_state(*ck.optimizer);
    const auto& r = ck.metadata.at("result");
    result.history = history_from_json(r.at("history"));
    result.best_epoch = r.at("best_epoch").get<std::size_t>();
    result.best_validation = r.at("best_validation").get<double>();
    result.initial_validation = r.at("initial_validation").get<double>();
    start_epoch = ck.metadata.at("epoch").get<std::size_t>() + 1;
    const fs::path best_file = epoch_path(options.resume_from->parent_path(), result.best_epoch);
    best = result.best_epoch + 1 == start_epoch ? loop.params : nn::load_checkpoint(best_file).params;
    log_line(options, loop.kind + ": resumed after epoch " + std::to_string(start_epoch - 1));
  } else {
    result.initial_validation = loop.validate();
    result.best_validation = result.initial_validation;
    result.snapshots.push_back({0, 0, loop.params});
    if (options.checkpoint_dir) {
      fs::create_directories(*options.checkpoint_dir);
      nn::save_checkpoint(epoch_path(*options.checkpoint_dir, 0), loop.kind, metadata_for(0), loop.params,
                          &optimizer.state());
    }
    log_line(options, loop.kind + ": initial validation " + std::to_string(result.initial_validation));
  }

  std::vector<std::size_t> order(loop.samples);
  for (std::size_t epoch = start_epoch; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    nn::Rng rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    loop.set_training(true, options.seed * 1000003ull + epoch);

    double loss_sum = 0.0;
    std::size_t in_batch = 0, micro_batches = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t remaining = order.size() - (i - in_batch);
      const std::size_t this_batch = std::min(batch, remaining);
      nn::Tape tape;
      const nn::Var loss = loop.loss(tape, order[i]);
      loss_sum += loss.value()[0];
      tape.backward(loss, 1.0 / static_cast<double>(this_batch));
      if (++in_batch < this_batch) continue;
      in_batch = 0;
      if (++micro_batches % accumulation == 0 || i + 1 == order.size()) {
        optimizer.step();
        const auto& marks = options.snapshot_steps;
        if (std::find(marks.begin(), marks.end(), optimizer.step_count()) != marks.end()) {
          result.snapshots.push_back({optimizer.step_count(), epoch, loop.params});
          if (options.checkpoint_dir) {
            nn::save_checkpoint(*options.checkpoint_dir / ("step-" + std::to_string(optimizer.step_count()) + ".ckpt"),
                                loop.kind, metadata_for(epoch), loop.params);
          }
        }
      }
    }
    loop.set_training(false, 0);

    EpochRecord record{epoch, loss_sum / static_cast<double>(order.size()), loop.validate(), optimizer.step_count()};
    result.history.push_back(record);
    if (record.validation > result.best_validation) {
      result.best_validation = record.validation;
      result.best_epoch = epoch;
      best = loop.params;
    }
    result.snapshots.push_back({optimizer.step_count(), epoch, loop.params});
    log_line(options, loop.kind + ": epoch " + std::to_string(epoch) + " loss " + std::to_string(record.train_loss) +
                          " validation " + std::to_string(record.validation));
    if (options.checkpoint_dir) {
      const nlohmann::json meta = metadata_for(epoch);
      nn::save_checkpoint(epoch_path(*options.checkpoint_dir, epoch), loop.kind, meta, loop.params,
                          &optimizer.state());
      nn::save_checkpoint(*options.checkpoint_dir / "best.ckpt", loop.kind, meta, best);
      std::ofstream(*options.checkpoint_dir / "history.json") << to_json(result).dump(2) << '\n';
    }
  }
  nn::restore_parameters(loop.params, best);
  return result;
}

}  // namespace

metrics::BleuScore validation_bleu(models::MtModel& model, const data::ParallelCorpus& corpus, std::size_t limit) {
  const std::size_t n = limit == 0 ? corpus.size() : std::min(limit, corpus.size());
  std::vector<vocab::Sentence> candidates, references;
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = model.vocabulary().encode(corpus[i].source);
    candidates.push_back(model.vocabulary().decode_text(model.greedy_decode(src)));
    references.push_back(corpus[i].target);
  }
  return metrics::corpus_bleu(candidates, references);
}

TrainResult train_mt(models::MtModel& model, const data::ParallelCorpus& train, const data::ParallelCorpus& dev,
                     const TrainOptions& options) {
  require(!train.empty(), ErrorCategory::kInvalidArgument, "train_mt: empty training corpus");
  require(!dev.empty(), ErrorCategory::kInvalidArgument, "train_mt: empty validation corpus");
  const auto& v = model.vocabulary();
  std::vector<std::vector<vocab::TokenId>> sources, targets;
  for (const auto& pair : train) {
    sources.push_back(v.encode(pair.source));
    targets.push_back(v.encode_target(pair.target));
  }
  Loop loop{model.params(),
            train.size(),
            [&](nn::Tape& tape, std::size_t i) { return model.teacher_forced_loss(tape, sources[i], targets[i]); },
            [&] { return validation_bleu(model, dev, options.validation_limit).bleu; },
            [&](bool on, std::uint64_t seed) { model.set_training(on, seed); },
            "mt",
            {{"config", models::to_json(model.config())}, {"vocab_hash", v.content_hash()}}};
  return run(std::move(loop), options);
}

std::vector<vocab::TokenId> classifier_ids(const vocab::Vocabulary& vocab, const vocab::Sentence& text) {
  auto ids = vocab.encode(text);
  ids.push_back(vocab::kEos);
  return ids;
}

metrics::MetricKind metric_for(models::HeadKind head) {
  return head == models::HeadKind::kMultiClass ? metrics::MetricKind::kAccuracy
                                                : metrics::MetricKind::kMeanRPrecision;
}

metrics::EvalReport evaluate_classifier(models::TcModel& model, const data::LabeledCorpus& corpus,
                                        std::size_t limit) {
  const std::size_t n = limit == 0 ? corpus.size() : std::min(limit, corpus.size());
  std::vector<models::Prediction> predictions;
  std::vector<models::LabelSet> gold;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n; ++i) {
    predictions.push_back(model.classify_tokens(classifier_ids(model.vocabulary(), corpus[i].text)));
    gold.push_back(corpus[i].labels);
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  auto report = metrics::evaluate_predictions(metric_for(model.config().head), predictions, gold);
  report.ms_per_sample = ms / static_cast<double>(std::max<std::size_t>(n, 1));
  return report;
}

TrainResult train_tc(models::TcModel& model, const data::LabeledCorpus& train, const data::LabeledCorpus& dev,
                     const TrainOptions& options) {
  require(!train.empty(), ErrorCategory::kInvalidArgument, "train_tc: empty training corpus");
  require(!dev.empty(), ErrorCategory::kInvalidArgument, "train_tc: empty validation corpus");
  std::vector<std::vector<vocab::TokenId>> inputs;
  for (const auto& s : train) {
    for (std::size_t l : s.labels) {
      require(l < model.config().num_labels, ErrorCategory::kOutOfRange,
              "train_tc: label " + std::to_string(l) + " out of range for " +
                  std::to_string(model.config().num_labels) + " labels");
    }
    inputs.push_back(classifier_ids(model.vocabulary(), s.text));
  }
  Loop loop{model.params(),
            train.size(),
            [&](nn::Tape& tape, std::size_t i) {
              return model.loss(model.logits_from_tokens(tape, inputs[i]), train[i].labels);
            },
            [&] { return evaluate_classifier(model, dev, options.validation_limit).aggregate; },
            [](bool, std::uint64_t) {},
            "tc",
            {{"config", models::to_json(model.config())}, {"vocab_hash", model.vocabulary().content_hash()}}};
  return run(std::move(loop), options);
}

}  // namespace t3l::training
