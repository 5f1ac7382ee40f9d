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

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "t3l/error.hpp"
#include "t3l/metrics/metrics.hpp"
#include "t3l/synth/synthlang.hpp"

using namespace t3l;
using synth::LanguagePair;
using synth::LanguageSpec;

namespace {

std::set<std::uint64_t> text_hashes(const data::LabeledCorpus& c) {
  std::set<std::uint64_t> out;
  for (const auto& s : c) out.insert(vocab::fnv1a(vocab::join(s.text)));
  return out;
}

bool disjoint(const std::set<std::uint64_t>& a, const std::set<std::uint64_t>& b) {
  for (auto h : a) {
    if (b.count(h)) return false;
  }
  return true;
}

// BLEU of noisy translations against the clean cipher of the same text.
double degradation_bleu(const LanguageSpec& spec) {
  const LanguagePair lang(spec);
  LanguageSpec clean_spec = spec;
  clean_spec.reorder = 0.0;
  clean_spec.noise = 0.0;
  const LanguagePair clean(clean_spec);
  synth::CorpusSizes sizes{0, 0, 400};
  const auto splits = synth::gen_language_pair(spec, sizes, 3);
  std::vector<vocab::Sentence> cand, ref;
  nn::Rng rng(0);
  for (const auto& p : splits.test) {
    cand.push_back(p.source);
    ref.push_back(clean.translate(p.target, rng));
  }
  return metrics::corpus_bleu(cand, ref).bleu;
}

}  // namespace

TEST_SUITE("synthlang") {
  TEST_CASE("generation is deterministic in the seed") {
    const LanguageSpec spec = synth::degrade_language(LanguageSpec{}, 0.5);
    const synth::CorpusSizes sizes{50, 10, 10};
    const auto a = synth::gen_language_pair(spec, sizes, 4);
    const auto b = synth::gen_language_pair(spec, sizes, 4);
    const auto c = synth::gen_language_pair(spec, sizes, 5);
    REQUIRE(a.train.size() == 50);
    bool all_same = true, any_diff = false;
    for (std::size_t i = 0; i < a.train.size(); ++i) {
      all_same = all_same && a.train[i].source == b.train[i].source && a.train[i].target == b.train[i].target;
      any_diff = any_diff || a.train[i].target != c.train[i].target;
    }
    CHECK(all_same);
    CHECK(any_diff);

    const auto d1 = synth::gen_classification_dataset(synth::entailment_task(), spec, 9);
    const auto d2 = synth::gen_classification_dataset(synth::entailment_task(), spec, 9);
    CHECK(text_hashes(d1.tgt_test) == text_hashes(d2.tgt_test));
    CHECK(text_hashes(d1.fewshot_large) == text_hashes(d2.fewshot_large));
  }

  TEST_CASE("a clean cipher is an invertible word substitution") {
    const LanguagePair lang(LanguageSpec{});
    const auto splits = synth::gen_language_pair(LanguageSpec{}, {200, 0, 0}, 1);
    for (const auto& p : splits.train) {
      REQUIRE(p.source.size() == p.target.size());
      for (std::size_t i = 0; i < p.source.size(); ++i) REQUIRE(p.source[i] == lang.cipher(p.target[i]));
      REQUIRE(lang.invert_sentence(p.source) == p.target);
    }
    std::set<std::string> images;
    for (const auto& w : lang.content_words()) images.insert(lang.cipher(w));
    CHECK(images.size() == lang.content_words().size());
    for (const auto& w : lang.function_words()) CHECK(lang.cipher(w) == w);
  }

  TEST_CASE("full reordering permutes but keeps the token multiset") {
    LanguageSpec spec;
    spec.reorder = 1.0;
    const LanguagePair lang(spec);
    nn::Rng rng(2);
    const vocab::Sentence hr{"w01", "w02", "the", "w03", "w04", "w05"};
    const vocab::Sentence out = lang.translate(hr, rng);
    vocab::Sentence expect;
    for (const auto& t : hr) expect.push_back(lang.cipher(t));
    CHECK(out != expect);
    auto a = out, b = expect;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    // Adjacent swaps at rate 1 exchange every disjoint pair.
    CHECK(out == vocab::Sentence{expect[1], expect[0], expect[3], expect[2], expect[5], expect[4]});
  }

  TEST_CASE("noise substitutes unique synonyms that still invert") {
    LanguageSpec spec;
    spec.noise = 1.0;
    const LanguagePair lang(spec);
    nn::Rng rng(3);
    const vocab::Sentence hr{"w00", "of", "w10"};
    const vocab::Sentence out = lang.translate(hr, rng);
    CHECK(out[0] == lang.synonym_of_cipher(lang.cipher("w00")));
    CHECK(out[1] == "of");
    CHECK(lang.invert_sentence(out) == hr);
  }

  TEST_CASE("degrade endpoints") {
    const LanguageSpec base{};
    CHECK(synth::degrade_language(base, 0.0).noise == base.noise);
    CHECK(synth::degrade_language(base, 0.0).reorder == base.reorder);
    CHECK(synth::degrade_language(base, 1.0).noise == base.max_noise);
    CHECK(synth::degrade_language(base, 1.0).reorder == base.max_reorder);
    CHECK_THROWS_AS(synth::degrade_language(base, 1.5), Error);
  }

  TEST_CASE("bleu against the clean cipher falls with severity") {
    double prev = 2.0;
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double b = degradation_bleu(synth::degrade_language(LanguageSpec{}, s));
      CHECK(b < prev);
      prev = b;
    }
    CHECK(degradation_bleu(LanguageSpec{}) == doctest::Approx(1.0));
  }

  TEST_CASE("shared vocabulary covers every surface form") {
    const LanguagePair lang(LanguageSpec{});
    const auto v = synth::shared_vocabulary(lang);
    CHECK(v.size() == 5 + 8 + 3 * 48);
    for (const auto& w : lang.content_words()) {
      CHECK(v.contains(w));
      CHECK(v.contains(lang.cipher(w)));
      CHECK(v.contains(lang.synonym_of_cipher(lang.cipher(w))));
    }
  }

  TEST_CASE("classification datasets: pools, disjointness, oracle and balance") {
    for (const auto& task : {synth::entailment_task(), synth::topic_task(), synth::multilabel_task()}) {
      CAPTURE(task.name);
      const LanguageSpec lang_spec = synth::degrade_language(LanguageSpec{}, 0.3);
      const auto d = synth::gen_classification_dataset(task, lang_spec, 2);
      CHECK(d.fewshot(10).size() == 10);
      CHECK(d.fewshot(100).size() == 100);
      CHECK(d.selection_dev.size() == task.sizes.dev - 110);
      CHECK(d.tgt_test.size() == task.sizes.test);
      CHECK_THROWS_AS(d.fewshot(5), Error);

      const auto small = text_hashes(d.fewshot_small), large = text_hashes(d.fewshot_large);
      const auto sel = text_hashes(d.selection_dev), test = text_hashes(d.tgt_test);
      CHECK(disjoint(small, large));
      CHECK(disjoint(small, sel));
      CHECK(disjoint(large, sel));
      CHECK(disjoint(small, test));
      CHECK(disjoint(large, test));
      CHECK(disjoint(sel, test));

      const LanguagePair lang(lang_spec);
      const synth::LabelOracle oracle(task, lang);
      for (std::size_t i = 0; i < d.hr_test.size(); ++i) {
        REQUIRE(oracle(d.hr_test[i].text) == d.hr_test[i].labels);
        REQUIRE(d.tgt_test[i].labels == d.hr_test[i].labels);
        REQUIRE(lang.invert_sentence(d.tgt_test[i].text).size() == d.hr_test[i].text.size());
        REQUIRE(!d.hr_test[i].labels.empty());
      }

      if (task.kind == synth::TaskKind::kMultiClass) {
        std::map<std::size_t, std::size_t> counts;
        for (const auto& s : d.hr_train) counts[s.labels.at(0)]++;
        REQUIRE(counts.size() == task.num_labels);
        const double expect = static_cast<double>(d.hr_train.size()) / static_cast<double>(task.num_labels);
        for (auto [label, n] : counts) CHECK(std::abs(static_cast<double>(n) - expect) <= 0.05 * expect);
      }
    }
  }

  TEST_CASE("task validation") {
    synth::TaskSpec t = synth::entailment_task();
    t.num_labels = 20;
    t.markers_per_label = 3;
    CHECK_THROWS_AS(synth::gen_classification_dataset(t, LanguageSpec{}, 1), Error);
    t = synth::entailment_task();
    t.sizes.dev = 50;
    CHECK_THROWS_AS(synth::gen_classification_dataset(t, LanguageSpec{}, 1), Error);
    CHECK_THROWS_AS(synth::task_from_json({{"preset", "nope"}}), Error);
    CHECK(synth::task_from_json({{"preset", "multilabel21"}}).num_labels == 21);
  }
}
