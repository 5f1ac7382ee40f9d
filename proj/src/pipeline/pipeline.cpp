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

#include "t3l/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "t3l/bridge/bridge.hpp"
#include "t3l/error.hpp"
#include "t3l/nn/checkpoint.hpp"
#include "t3l/nn/ops.hpp"

namespace t3l::pipeline {

namespace fs = std::filesystem;

nlohmann::json to_json(const FreezingPolicy& p) {
  return {{"mt_fraction", p.mt_fraction}, {"tc_fraction", p.tc_fraction}, {"freeze_tc_head", p.freeze_tc_head}};
}

FreezingPolicy freezing_from_json(const nlohmann::json& j) {
  FreezingPolicy p;
  p.mt_fraction = j.value("mt_fraction", p.mt_fraction);
  p.tc_fraction = j.value("tc_fraction", p.tc_fraction);
  p.freeze_tc_head = j.value("freeze_tc_head", p.freeze_tc_head);
  return p;
}

T3lPipeline::T3lPipeline(models::MtModel mt, models::TcModel tc) : mt_(std::move(mt)), tc_(std::move(tc)) {
  vocab::assert_alignment(mt_.vocabulary(), tc_.vocabulary());
}

std::size_t T3lPipeline::parameter_count() const {
  return mt_.params().element_count() + tc_.params().element_count();
}

std::size_t T3lPipeline::trainable_parameter_count() const {
  return mt_.params().trainable_element_count() + tc_.params().trainable_element_count();
}

namespace {

std::size_t frozen_units(double fraction, std::size_t layers) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(layers)));
}

void freeze(nn::ParameterSet& params, const std::vector<std::size_t>& indices) {
  for (std::size_t i : indices) params[i].frozen = true;
}

}  // namespace

void apply_freezing(T3lPipeline& pipeline, const FreezingPolicy& policy) {
  require(policy.mt_fraction >= 0.0 && policy.mt_fraction <= 1.0 && policy.tc_fraction >= 0.0 &&
              policy.tc_fraction <= 1.0,
          ErrorCategory::kConfig, "freezing: fractions must be in [0, 1]");
  auto& mt = pipeline.mt_;
  auto& tc = pipeline.tc_;
  mt.params().set_frozen(false);
  tc.params().set_frozen(false);
  const std::size_t mt_units = frozen_units(policy.mt_fraction, mt.layer_count());
  if (mt_units > 0) freeze(mt.params(), mt.source_embedding_parameters());
  for (std::size_t i = 0; i < mt_units; ++i) freeze(mt.params(), mt.layer_parameters(i));
  const std::size_t tc_units = frozen_units(policy.tc_fraction, tc.layer_count());
  for (std::size_t i = 0; i < tc_units; ++i) freeze(tc.params(), tc.layer_parameters(tc.layer_count() - 1 - i));
  if (policy.freeze_tc_head) freeze(tc.params(), tc.head_parameters());
  pipeline.policy_ = policy;
}

nn::Var pipeline_logits(nn::Tape& tape, T3lPipeline& pipeline, std::span<const vocab::TokenId> source,
                        bool force_one_hot) {
  models::SoftTranslation st = pipeline.mt().soft_decode(tape, source);
  if (force_one_hot) {
    nn::Tensor one_hot = nn::Tensor::matrix(st.length(), pipeline.vocabulary().size());
    for (std::size_t j = 0; j < st.length(); ++j) one_hot.at(j, st.tokens[j]) = 1.0;
    st.probabilities = tape.constant(std::move(one_hot));
  }
  const bridge::ExpectedEmbeddingSequence seq = bridge::bridge_sequence(tape, st, pipeline.tc());
  return pipeline.tc().logits_from_embeddings(tape, seq.embeddings);
}

nn::Var pipeline_loss(nn::Tape& tape, T3lPipeline& pipeline, std::span<const vocab::TokenId> source,
                      const models::LabelSet& labels) {
  return pipeline.tc().loss(pipeline_logits(tape, pipeline, source), labels);
}

models::Prediction predict(T3lPipeline& pipeline, std::span<const vocab::TokenId> source, bool force_one_hot) {
  nn::Tape tape(false);
  const nn::Var logits = pipeline_logits(tape, pipeline, source, force_one_hot);
  return models::make_prediction(logits.value().values(), pipeline.tc().config().head);
}

models::Prediction predict_hard(T3lPipeline& pipeline, std::span<const vocab::TokenId> source) {
  return pipeline.tc().classify_tokens(pipeline.mt().greedy_decode(source));
}

metrics::EvalReport evaluate_pipeline(const T3lPipeline& pipeline, const data::LabeledCorpus& corpus, Path path,
                                      std::size_t threads) {
  require(!corpus.empty(), ErrorCategory::kInvalidArgument, "evaluate: empty corpus");
  threads = std::clamp<std::size_t>(threads, 1, corpus.size());
  std::vector<models::Prediction> predictions(corpus.size());
  const auto work = [&](std::size_t begin, std::size_t end) {
    T3lPipeline local = pipeline;
    for (std::size_t i = begin; i < end; ++i) {
      const auto ids = local.vocabulary().encode(corpus[i].text);
      predictions[i] = path == Path::kSoft ? predict(local, ids) : predict_hard(local, ids);
    }
  };
  const auto start = std::chrono::steady_clock::now();
  if (threads == 1) {
    work(0, corpus.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (corpus.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk, end = std::min(corpus.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::vector<models::LabelSet> gold;
  for (const auto& s : corpus) gold.push_back(s.labels);
  auto report = metrics::evaluate_predictions(training::metric_for(pipeline.tc().config().head), predictions, gold);
  report.ms_per_sample = ms / static_cast<double>(corpus.size());
  return report;
}

JointFinetuner::JointFinetuner(T3lPipeline& pipeline, training::TrainOptions options)
    : pipeline_(pipeline), options_(std::move(options)) {}

training::TrainResult JointFinetuner::run(const data::LabeledCorpus& shots, const data::LabeledCorpus& selection) {
  require(!shots.empty(), ErrorCategory::kInvalidArgument,
          "finetune: no few-shot samples (use predict for zero-shot)");
  require(!selection.empty(), ErrorCategory::kInvalidArgument, "finetune: empty selection split");
  require(options_.epochs >= 1, ErrorCategory::kConfig, "finetune: epochs must be >= 1");
  auto& mt = pipeline_.mt();
  auto& tc = pipeline_.tc();
  std::vector<nn::Parameter*> pointers;
  for (auto& p : mt.params()) pointers.push_back(&p);
  for (auto& p : tc.params()) pointers.push_back(&p);
  nn::AdamW optimizer(options_.optimizer, pointers);

  std::vector<std::vector<vocab::TokenId>> inputs;
  for (const auto& s : shots) inputs.push_back(pipeline_.vocabulary().encode(s.text));
  const auto validate = [&] {
    return evaluate_pipeline(pipeline_, selection, Path::kSoft).aggregate;
  };

  training::TrainResult result;
  result.initial_validation = validate();
  result.best_validation = result.initial_validation;
  nn::ParameterSet best_mt = mt.params(), best_tc = tc.params();
  std::vector<std::size_t> order(shots.size());
  const std::size_t batch = options_.optimizer.batch_size;
  const std::size_t accumulation = options_.optimizer.accumulation;
  for (std::size_t epoch = 1; epoch <= options_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(options_.seed), static_cast<std::uint32_t>(options_.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    nn::Rng rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    mt.set_training(true, options_.seed * 1000003ull + epoch);
    double loss_sum = 0.0;
    std::size_t in_batch = 0, micro_batches = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t this_batch = std::min(batch, order.size() - (i - in_batch));
      nn::Tape tape;
      const nn::Var loss = pipeline_loss(tape, pipeline_, inputs[order[i]], shots[order[i]].labels);
      loss_sum += loss.value()[0];
      tape.backward(loss, 1.0 / static_cast<double>(this_batch));
      if (++in_batch < this_batch) continue;
      in_batch = 0;
      if (++micro_batches % accumulation == 0 || i + 1 == order.size()) optimizer.step();
    }
    mt.set_training(false);
    training::EpochRecord record{epoch, loss_sum / static_cast<double>(order.size()), validate(),
                                 optimizer.step_count()};
    result.history.push_back(record);
    if (record.validation > result.best_validation) {
      result.best_validation = record.validation;
      result.best_epoch = epoch;
      best_mt = mt.params();
      best_tc = tc.params();
    }
    if (options_.log) {
      options_.log("finetune: epoch " + std::to_string(epoch) + " loss " + std::to_string(record.train_loss) +
                   " selection " + std::to_string(record.validation));
    }
  }
  nn::restore_parameters(mt.params(), best_mt);
  nn::restore_parameters(tc.params(), best_tc);
  return result;
}

training::TrainResult finetune_end_to_end(T3lPipeline& pipeline, const data::LabeledCorpus& shots,
                                          const data::LabeledCorpus& selection,
                                          const training::TrainOptions& options) {
  return JointFinetuner(pipeline, options).run(shots, selection);
}

data::LabeledCorpus translate_corpus(models::MtModel& translator, const data::LabeledCorpus& corpus) {
  const auto& v = translator.vocabulary();
  data::LabeledCorpus out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back({v.decode_text(translator.greedy_decode(v.encode(s.text))), s.labels});
  return out;
}

metrics::EvalReport evaluate_lm_baseline(models::TcModel& classifier, const data::LabeledCorpus& corpus) {
  return training::evaluate_classifier(classifier, corpus);
}

std::pair<models::TcModel, training::TrainResult> translate_and_train(models::MtModel& reverse,
                                                                      const data::LabeledCorpus& train,
                                                                      const data::LabeledCorpus& dev,
                                                                      const models::TcConfig& config,
                                                                      std::uint64_t seed,
                                                                      const training::TrainOptions& options) {
  const data::LabeledCorpus translated_train = translate_corpus(reverse, train);
  const data::LabeledCorpus translated_dev = translate_corpus(reverse, dev);
  models::TcModel classifier(reverse.vocabulary(), config, seed);
  training::TrainResult result = training::train_tc(classifier, translated_train, translated_dev, options);
  return {std::move(classifier), std::move(result)};
}

namespace {

void check_vocab(const nn::Checkpoint& ck, const vocab::Vocabulary& vocabulary, const fs::path& path) {
  const auto hash = ck.metadata.value("vocab_hash", std::uint64_t{0});
  require(hash == vocabulary.content_hash(), ErrorCategory::kFormat,
          path.string() + ": checkpoint was trained with a different vocabulary");
}

}  // namespace

models::MtModel load_mt(const fs::path& checkpoint, const vocab::Vocabulary& vocabulary) {
  const nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  require(ck.kind == "mt", ErrorCategory::kFormat, checkpoint.string() + ": not a translator checkpoint");
  check_vocab(ck, vocabulary, checkpoint);
  models::MtModel model(vocabulary, models::mt_config_from_json(ck.metadata.at("config")), 0);
  nn::restore_parameters(model.params(), ck.params);
  return model;
}

models::TcModel load_tc(const fs::path& checkpoint, const vocab::Vocabulary& vocabulary) {
  const nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  require(ck.kind == "tc", ErrorCategory::kFormat, checkpoint.string() + ": not a classifier checkpoint");
  check_vocab(ck, vocabulary, checkpoint);
  models::TcModel model(vocabulary, models::tc_config_from_json(ck.metadata.at("config")), 0);
  nn::restore_parameters(model.params(), ck.params);
  return model;
}

void save_pipeline(const fs::path& dir, const T3lPipeline& pipeline, const nlohmann::json& metadata) {
  fs::create_directories(dir);
  const auto hash = pipeline.vocabulary().content_hash();
  pipeline.vocabulary().save(dir / "vocab.txt");
  nn::save_checkpoint(dir / "mt.ckpt", "mt", {{"config", models::to_json(pipeline.mt().config())}, {"vocab_hash", hash}},
                      pipeline.mt().params());
  nn::save_checkpoint(dir / "tc.ckpt", "tc", {{"config", models::to_json(pipeline.tc().config())}, {"vocab_hash", hash}},
                      pipeline.tc().params());
  const nlohmann::json doc = {{"format", "t3l-pipeline"},
                              {"version", 1},
                              {"freezing", to_json(pipeline.policy())},
                              {"vocab_hash", hash},
                              {"metadata", metadata}};
  std::ofstream out(dir / "pipeline.json");
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + (dir / "pipeline.json").string());
  out << doc.dump(2) << '\n';
}

T3lPipeline load_pipeline(const fs::path& dir) {
  std::ifstream in(dir / "pipeline.json");
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read " + (dir / "pipeline.json").string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kFormat, (dir / "pipeline.json").string() + ": " + e.what());
  }
  require(doc.value("format", std::string()) == "t3l-pipeline", ErrorCategory::kFormat,
          (dir / "pipeline.json").string() + ": not a pipeline document");
  const vocab::Vocabulary v = vocab::Vocabulary::load(dir / "vocab.txt");
  require(doc.at("vocab_hash").get<std::uint64_t>() == v.content_hash(), ErrorCategory::kFormat,
          dir.string() + ": vocabulary does not match the pipeline document");
  // Frozen flags travel inside the checkpoints; the policy is recorded alongside.
  T3lPipeline p(load_mt(dir / "mt.ckpt", v), load_tc(dir / "tc.ckpt", v));
  const FreezingPolicy policy = freezing_from_json(doc.at("freezing"));
  apply_freezing(p, policy);
  return p;
}

}  // namespace t3l::pipeline
