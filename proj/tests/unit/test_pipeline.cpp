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

#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "t3l/error.hpp"
#include "t3l/nn/gradcheck.hpp"
#include "t3l/nn/ops.hpp"
#include "t3l/pipeline/pipeline.hpp"
#include "test_helpers.hpp"

using namespace t3l;
using pipeline::FreezingPolicy;
using pipeline::T3lPipeline;
using vocab::TokenId;

namespace {

models::MtConfig micro_mt() {
  models::MtConfig c;
  c.d_model = 8;
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  c.heads = 2;
  c.ffn_dim = 16;
  c.max_source_length = 16;
  c.max_decode_length = 8;
  return c;
}

models::TcConfig micro_tc(std::size_t labels = 3) {
  models::TcConfig c;
  c.d_model = 8;
  c.layers = 2;
  c.heads = 2;
  c.ffn_dim = 16;
  c.max_length = 12;
  c.num_labels = labels;
  return c;
}

T3lPipeline micro_pipeline(std::uint64_t seed) {
  const auto v = t3l::testing::token_vocab(15);
  return T3lPipeline(models::MtModel(v, micro_mt(), seed), models::TcModel(v, micro_tc(), seed + 1));
}

std::vector<TokenId> random_source(nn::Rng& rng, std::size_t vocab_size) {
  std::vector<TokenId> ids(t3l::testing::random_dim(rng, 1, 10));
  for (auto& id : ids) id = t3l::testing::random_dim(rng, 5, vocab_size - 1);
  return ids;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

std::set<std::string> frozen_names(const nn::ParameterSet& ps) {
  std::set<std::string> out;
  for (const auto& p : ps) {
    if (p.frozen) out.insert(p.name);
  }
  return out;
}

std::set<std::string> names_with(const nn::ParameterSet& ps, const std::vector<std::string>& prefixes) {
  std::set<std::string> out;
  for (const auto& p : ps) {
    for (const auto& pre : prefixes) {
      if (starts_with(p.name, pre)) out.insert(p.name);
    }
  }
  return out;
}

data::LabeledCorpus random_labeled(nn::Rng& rng, std::size_t n, std::size_t vocab_size) {
  const auto v = t3l::testing::token_vocab(vocab_size - 5);
  data::LabeledCorpus out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ids = random_source(rng, vocab_size);
    out.push_back({v.decode(ids), {ids[0] % 3}});
  }
  return out;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("freezing policy selects the expected parameters") {
    T3lPipeline p = micro_pipeline(1);
    pipeline::apply_freezing(p, FreezingPolicy{});
    CHECK(frozen_names(p.mt().params()) == names_with(p.mt().params(), {"source.", "encoder."}));
    CHECK(frozen_names(p.tc().params()) == names_with(p.tc().params(), {"encoder.1.", "encoder.norm"}));

    pipeline::apply_freezing(p, FreezingPolicy{0.75, 1.0, true});
    CHECK(frozen_names(p.mt().params()) == names_with(p.mt().params(), {"source.", "encoder.", "decoder.0."}));
    CHECK(frozen_names(p.tc().params()) ==
          names_with(p.tc().params(), {"encoder.", "head."}));

    pipeline::apply_freezing(p, FreezingPolicy{0.0, 0.0, false});
    CHECK(frozen_names(p.mt().params()).empty());
    CHECK(frozen_names(p.tc().params()).empty());
    CHECK(p.trainable_parameter_count() == p.parameter_count());

    // Any positive fraction freezes at least one unit.
    pipeline::apply_freezing(p, FreezingPolicy{0.01, 0.01, false});
    CHECK(frozen_names(p.mt().params()) == names_with(p.mt().params(), {"source.", "encoder.0."}));
    CHECK(frozen_names(p.tc().params()) == names_with(p.tc().params(), {"encoder.1.", "encoder.norm"}));

    CHECK_THROWS_AS(pipeline::apply_freezing(p, FreezingPolicy{1.5, 0.0, false}), Error);
  }

  TEST_CASE("trainable count sums unfrozen elements") {
    T3lPipeline p = micro_pipeline(2);
    pipeline::apply_freezing(p, FreezingPolicy{});
    std::size_t expect = 0, total = 0;
    for (const auto* set : {&p.mt().params(), &p.tc().params()}) {
      for (const auto& prm : *set) {
        std::size_t n = 1;
        for (auto d : prm.value.shape()) n *= d;
        total += n;
        if (!prm.frozen) expect += n;
      }
    }
    CHECK(p.trainable_parameter_count() == expect);
    CHECK(p.parameter_count() == total);
    CHECK(expect < total);
  }

  TEST_CASE("mismatched vocabularies are rejected") {
    const auto v = t3l::testing::token_vocab(15), w = t3l::testing::token_vocab(14);
    CHECK_THROWS_AS(T3lPipeline(models::MtModel(v, micro_mt(), 1), models::TcModel(w, micro_tc(), 1)), Error);
  }

  TEST_CASE("forced one-hot soft path equals the hard path bitwise") {
    nn::Rng rng(3);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      T3lPipeline p = micro_pipeline(seed);
      for (int c = 0; c < 20; ++c) {
        const auto src = random_source(rng, p.vocabulary().size());
        const auto soft = pipeline::predict(p, src, true);
        const auto hard = pipeline::predict_hard(p, src);
        REQUIRE(t3l::testing::bitwise_equal(soft.logits, hard.logits));
        const auto again = pipeline::predict(p, src);
        REQUIRE(t3l::testing::bitwise_equal(again.logits, pipeline::predict(p, src).logits));
      }
    }
  }

  TEST_CASE("composed gradient matches finite differences") {
    nn::Rng rng(4);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      T3lPipeline p = micro_pipeline(100 + seed);
      const auto src = random_source(rng, p.vocabulary().size());
      std::vector<nn::Parameter*> ptrs;
      for (auto& prm : p.mt().params()) ptrs.push_back(&prm);
      for (auto& prm : p.tc().params()) ptrs.push_back(&prm);
      const auto tokens = p.mt().greedy_decode(src);
      const auto result = nn::finite_difference_check(
          [&](nn::Tape& t) { return pipeline::pipeline_loss(t, p, src, {seed % 3}); }, ptrs, 1e-5, 200, rng);
      // The perturbations must not flip a greedy token.
      REQUIRE(p.mt().greedy_decode(src) == tokens);
      CAPTURE(result.worst_parameter);
      CHECK(result.max_relative_error < 1e-3);
    }
  }

  TEST_CASE("a joint step moves trainable parameters and leaves frozen ones") {
    T3lPipeline p = micro_pipeline(5);
    pipeline::apply_freezing(p, FreezingPolicy{});
    const auto mt_before = p.mt().params();
    const auto tc_before = p.tc().params();
    std::vector<nn::Parameter*> ptrs;
    for (auto& prm : p.mt().params()) ptrs.push_back(&prm);
    for (auto& prm : p.tc().params()) ptrs.push_back(&prm);
    nn::AdamWConfig cfg;
    cfg.learning_rate = 1e-2;
    nn::AdamW opt(cfg, ptrs);
    nn::Rng rng(5);
    nn::Tape tape;
    tape.backward(pipeline::pipeline_loss(tape, p, random_source(rng, p.vocabulary().size()), {1}));
    opt.step();
    bool mt_moved = false;
    for (std::size_t i = 0; i < mt_before.size(); ++i) {
      if (mt_before[i].frozen) {
        REQUIRE(p.mt().params()[i].value == mt_before[i].value);
      } else {
        mt_moved = mt_moved || !(p.mt().params()[i].value == mt_before[i].value);
      }
    }
    for (std::size_t i = 0; i < tc_before.size(); ++i) {
      if (tc_before[i].frozen) REQUIRE(p.tc().params()[i].value == tc_before[i].value);
    }
    CHECK(mt_moved);
  }

  TEST_CASE("fine-tuning keeps frozen parameters and validates its inputs") {
    T3lPipeline p = micro_pipeline(6);
    pipeline::apply_freezing(p, FreezingPolicy{});
    nn::Rng rng(6);
    const auto shots = random_labeled(rng, 12, p.vocabulary().size());
    const auto selection = random_labeled(rng, 20, p.vocabulary().size());
    const auto zero_shot = pipeline::evaluate_pipeline(p, selection, pipeline::Path::kSoft);

    training::TrainOptions opts;
    opts.optimizer = nn::joint_reference_preset();
    opts.optimizer.learning_rate = 1e-2;
    opts.epochs = 4;
    pipeline::JointFinetuner tuner(p, opts);
    // Constructing the tuner does not touch the model.
    CHECK(pipeline::evaluate_pipeline(p, selection, pipeline::Path::kSoft).aggregate == zero_shot.aggregate);
    CHECK_THROWS_AS(tuner.run({}, selection), Error);

    const auto mt_before = p.mt().params();
    const auto result = tuner.run(shots, selection);
    CHECK(result.history.size() == 4);
    CHECK(result.best_validation >= result.initial_validation);
    CHECK(result.initial_validation == zero_shot.aggregate);
    for (std::size_t i = 0; i < mt_before.size(); ++i) {
      if (mt_before[i].frozen) REQUIRE(p.mt().params()[i].value == mt_before[i].value);
    }
    CHECK(pipeline::evaluate_pipeline(p, selection, pipeline::Path::kSoft).aggregate == result.best_validation);
  }

  TEST_CASE("threaded evaluation matches serial evaluation") {
    T3lPipeline p = micro_pipeline(7);
    nn::Rng rng(7);
    const auto corpus = random_labeled(rng, 30, p.vocabulary().size());
    for (auto path : {pipeline::Path::kSoft, pipeline::Path::kHard}) {
      const auto a = pipeline::evaluate_pipeline(p, corpus, path, 1);
      const auto b = pipeline::evaluate_pipeline(p, corpus, path, 3);
      CHECK(a.aggregate == b.aggregate);
      for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].ranking == b.samples[i].ranking);
    }
  }

  TEST_CASE("save and load reproduce predictions and the freezing policy") {
    T3lPipeline p = micro_pipeline(8);
    pipeline::apply_freezing(p, FreezingPolicy{0.25, 0.5, true});
    const auto dir = t3l::testing::temp_dir("pipeline-save");
    pipeline::save_pipeline(dir, p, {{"seed", 8}});
    T3lPipeline q = pipeline::load_pipeline(dir);
    CHECK(q.policy().mt_fraction == 0.25);
    CHECK(q.policy().freeze_tc_head);
    CHECK(q.trainable_parameter_count() == p.trainable_parameter_count());
    nn::Rng rng(8);
    for (int c = 0; c < 20; ++c) {
      const auto src = random_source(rng, p.vocabulary().size());
      REQUIRE(pipeline::predict(p, src).logits == pipeline::predict(q, src).logits);
    }
    CHECK_THROWS_AS(pipeline::load_pipeline(dir / "absent"), Error);
    const auto other = t3l::testing::token_vocab(14);
    CHECK_THROWS_AS(pipeline::load_mt(dir / "mt.ckpt", other), Error);
    CHECK_THROWS_AS(pipeline::load_tc(dir / "mt.ckpt", p.vocabulary()), Error);
  }

  TEST_CASE("translate-and-train through an identity translator") {
    const auto v = t3l::testing::token_vocab(8);
    nn::Rng rng(9);
    models::MtConfig cfg = micro_mt();
    cfg.d_model = 32;
    cfg.ffn_dim = 64;
    cfg.encoder_layers = 1;
    cfg.decoder_layers = 1;
    models::MtModel copier(v, cfg, 9);
    training::TrainOptions mt_opts;
    mt_opts.optimizer.learning_rate = 3e-3;
    mt_opts.optimizer.warmup_steps = 30;
    mt_opts.optimizer.batch_size = 8;
    mt_opts.epochs = 12;
    training::train_mt(copier, t3l::testing::copy_corpus(v, 3000, 2, 6, rng),
                       t3l::testing::copy_corpus(v, 100, 2, 6, rng), mt_opts);

    // Label: whether t00 occurs.
    const auto label = [&](std::size_t n) {
      data::LabeledCorpus out;
      for (const auto& pair : t3l::testing::copy_corpus(v, n, 2, 6, rng)) {
        const bool has = std::find(pair.source.begin(), pair.source.end(), "t00") != pair.source.end();
        out.push_back({pair.source, {has ? std::size_t{1} : std::size_t{0}}});
      }
      return out;
    };
    const auto train = label(1000), dev = label(100), test = label(200);
    const auto translated = pipeline::translate_corpus(copier, test);
    std::size_t same = 0;
    for (std::size_t i = 0; i < test.size(); ++i) same += translated[i].text == test[i].text;
    CHECK(same >= 198);

    training::TrainOptions tc_opts = mt_opts;
    tc_opts.epochs = 3;
    models::TcConfig tc_cfg = micro_tc(2);
    tc_cfg.d_model = 16;
    auto [classifier, result] = pipeline::translate_and_train(copier, train, dev, tc_cfg, 10, tc_opts);
    CHECK(result.history.size() == 3);
    CHECK(pipeline::evaluate_lm_baseline(classifier, test).aggregate >= 0.95);
  }
}
