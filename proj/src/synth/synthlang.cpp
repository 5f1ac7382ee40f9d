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

#include "t3l/synth/synthlang.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "t3l/error.hpp"

namespace t3l::synth {
namespace {

constexpr const char* kFunctionWords[] = {"the", "of", "and", "to", "in", "is", "on", "at",
                                          "by", "for", "as", "an", "or", "it", "be", "we"};
constexpr double kFunctionWordRate = 0.3;

std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%02zu", prefix, i);
  return buf;
}

// Independent sub-streams so changing one split's size leaves the others alone.
nn::Rng stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return nn::Rng(seq);
}

std::size_t uniform_index(nn::Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

nlohmann::json to_json(const LanguageSpec& s) {
  return {{"seed", s.seed},       {"function_words", s.function_words},
          {"content_words", s.content_words}, {"reorder", s.reorder},
          {"noise", s.noise},     {"max_reorder", s.max_reorder},
          {"max_noise", s.max_noise}};
}

LanguageSpec language_from_json(const nlohmann::json& j) {
  LanguageSpec s;
  s.seed = j.value("seed", s.seed);
  s.function_words = j.value("function_words", s.function_words);
  s.content_words = j.value("content_words", s.content_words);
  s.reorder = j.value("reorder", s.reorder);
  s.noise = j.value("noise", s.noise);
  s.max_reorder = j.value("max_reorder", s.max_reorder);
  s.max_noise = j.value("max_noise", s.max_noise);
  return s;
}

LanguageSpec degrade_language(const LanguageSpec& spec, double severity) {
  require(severity >= 0.0 && severity <= 1.0, ErrorCategory::kInvalidArgument,
          "degrade_language: severity must be in [0, 1]");
  if (severity == 0.0) return spec;
  LanguageSpec out = spec;
  out.noise = spec.noise + severity * (spec.max_noise - spec.noise);
  out.reorder = spec.reorder + severity * (spec.max_reorder - spec.reorder);
  if (severity == 1.0) {
    out.noise = spec.max_noise;
    out.reorder = spec.max_reorder;
  }
  return out;
}

LanguagePair::LanguagePair(LanguageSpec spec) : spec_(spec) {
  require(spec_.content_words > 0, ErrorCategory::kInvalidArgument, "synthlang: empty content vocabulary");
  require(spec_.function_words <= std::size(kFunctionWords), ErrorCategory::kInvalidArgument,
          "synthlang: at most " + std::to_string(std::size(kFunctionWords)) + " function words");
  require(spec_.reorder >= 0.0 && spec_.reorder <= 1.0 && spec_.noise >= 0.0 && spec_.noise <= 1.0,
          ErrorCategory::kInvalidArgument, "synthlang: rates must be in [0, 1]");
  for (std::size_t i = 0; i < spec_.function_words; ++i) {
    function_words_.emplace_back(kFunctionWords[i]);
    forward_[function_words_.back()] = function_words_.back();
    backward_[function_words_.back()] = function_words_.back();
  }
  std::vector<std::size_t> perm(spec_.content_words);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  nn::Rng rng = stream(spec_.seed, 1);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < spec_.content_words; ++i) {
    content_.push_back(numbered('w', i));
    const std::string cipher_token = numbered('c', perm[i]);
    const std::string synonym = numbered('s', perm[i]);
    forward_[content_.back()] = cipher_token;
    synonym_[cipher_token] = synonym;
    backward_[cipher_token] = content_.back();
    backward_[synonym] = content_.back();
  }
}

const std::string& LanguagePair::cipher(const std::string& token) const {
  auto it = forward_.find(token);
  require(it != forward_.end(), ErrorCategory::kInvalidArgument, "synthlang: '" + token + "' is not a source token");
  return it->second;
}

const std::string& LanguagePair::synonym_of_cipher(const std::string& cipher_token) const {
  auto it = synonym_.find(cipher_token);
  require(it != synonym_.end(), ErrorCategory::kInvalidArgument,
          "synthlang: '" + cipher_token + "' is not a cipher token");
  return it->second;
}

const std::string& LanguagePair::invert(const std::string& token) const {
  auto it = backward_.find(token);
  require(it != backward_.end(), ErrorCategory::kInvalidArgument, "synthlang: '" + token + "' is not a target token");
  return it->second;
}

vocab::Sentence LanguagePair::translate(const vocab::Sentence& high_resource, nn::Rng& rng) const {
  std::bernoulli_distribution substitute(spec_.noise);
  std::bernoulli_distribution swap(spec_.reorder);
  vocab::Sentence out;
  out.reserve(high_resource.size());
  for (const std::string& tok : high_resource) {
    const std::string& c = cipher(tok);
    const bool is_content = synonym_.count(c) > 0;
    // Draw for every token so the stream does not depend on token identity.
    const bool sub = substitute(rng);
    out.push_back(is_content && sub ? synonym_.at(c) : c);
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (swap(rng)) {
      std::swap(out[i], out[i + 1]);
      ++i;
    }
  }
  return out;
}

vocab::Sentence LanguagePair::invert_sentence(const vocab::Sentence& target) const {
  vocab::Sentence out;
  out.reserve(target.size());
  for (const std::string& tok : target) out.push_back(invert(tok));
  return out;
}

vocab::Vocabulary shared_vocabulary(const LanguagePair& language) {
  vocab::Sentence all = language.function_words();
  for (const auto& w : language.content_words()) {
    const std::string& c = language.cipher(w);
    all.push_back(w);
    all.push_back(c);
    all.push_back(language.synonym_of_cipher(c));
  }
  const std::vector<vocab::Corpus> corpora{{all}};
  return vocab::Vocabulary::build(corpora);
}

namespace {

vocab::Sentence general_sentence(const LanguagePair& lang, std::size_t min_len, std::size_t max_len, nn::Rng& rng) {
  const std::size_t len = std::uniform_int_distribution<std::size_t>(min_len, max_len)(rng);
  std::bernoulli_distribution function_word(kFunctionWordRate);
  vocab::Sentence s;
  for (std::size_t i = 0; i < len; ++i) {
    const bool fw = function_word(rng) && !lang.function_words().empty();
    s.push_back(fw ? lang.function_words()[uniform_index(rng, lang.function_words().size())]
                   : lang.content_words()[uniform_index(rng, lang.content_words().size())]);
  }
  return s;
}

data::ParallelCorpus parallel_split(const LanguagePair& lang, std::size_t n, std::uint64_t seed, std::uint64_t salt,
                                    std::size_t min_len, std::size_t max_len) {
  nn::Rng text_rng = stream(seed, salt);
  nn::Rng noise_rng = stream(seed, salt + 100);
  data::ParallelCorpus out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    vocab::Sentence hr = general_sentence(lang, min_len, max_len, text_rng);
    out.push_back({lang.translate(hr, noise_rng), std::move(hr)});
  }
  return out;
}

}  // namespace

ParallelSplits gen_language_pair(const LanguageSpec& spec, const CorpusSizes& sizes, std::uint64_t seed,
                                 std::size_t min_length, std::size_t max_length) {
  require(min_length >= 1 && min_length <= max_length, ErrorCategory::kInvalidArgument,
          "gen_language_pair: bad length range");
  const LanguagePair lang(spec);
  return {parallel_split(lang, sizes.train, seed, 11, min_length, max_length),
          parallel_split(lang, sizes.dev, seed, 12, min_length, max_length),
          parallel_split(lang, sizes.test, seed, 13, min_length, max_length)};
}

nlohmann::json to_json(const TaskSpec& t) {
  return {{"name", t.name},
          {"kind", t.kind == TaskKind::kMultiClass ? "multiclass" : "multilabel"},
          {"num_labels", t.num_labels},
          {"markers_per_label", t.markers_per_label},
          {"markers_per_sample", t.markers_per_sample},
          {"max_labels_per_sample", t.max_labels_per_sample},
          {"min_length", t.min_length},
          {"max_length", t.max_length},
          {"sizes", {{"train", t.sizes.train}, {"dev", t.sizes.dev}, {"test", t.sizes.test}}}};
}

TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec t;
  const std::string preset = j.value("preset", std::string());
  if (preset == "entailment3") t = entailment_task();
  else if (preset == "topic4") t = topic_task();
  else if (preset == "multilabel21") t = multilabel_task();
  else if (!preset.empty()) fail(ErrorCategory::kConfig, "unknown task preset '" + preset + "'");
  t.name = j.value("name", t.name);
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    require(kind == "multiclass" || kind == "multilabel", ErrorCategory::kConfig, "unknown task kind '" + kind + "'");
    t.kind = kind == "multiclass" ? TaskKind::kMultiClass : TaskKind::kMultiLabel;
  }
  t.num_labels = j.value("num_labels", t.num_labels);
  t.markers_per_label = j.value("markers_per_label", t.markers_per_label);
  t.markers_per_sample = j.value("markers_per_sample", t.markers_per_sample);
  t.max_labels_per_sample = j.value("max_labels_per_sample", t.max_labels_per_sample);
  t.min_length = j.value("min_length", t.min_length);
  t.max_length = j.value("max_length", t.max_length);
  if (j.contains("sizes")) {
    const auto& s = j.at("sizes");
    t.sizes.train = s.value("train", t.sizes.train);
    t.sizes.dev = s.value("dev", t.sizes.dev);
    t.sizes.test = s.value("test", t.sizes.test);
  }
  return t;
}

TaskSpec entailment_task() { return TaskSpec{}; }

TaskSpec topic_task() {
  TaskSpec t;
  t.name = "topic4";
  t.num_labels = 4;
  t.markers_per_label = 3;
  t.markers_per_sample = 2;
  return t;
}

TaskSpec multilabel_task() {
  TaskSpec t;
  t.name = "multilabel21";
  t.kind = TaskKind::kMultiLabel;
  t.num_labels = 21;
  t.markers_per_label = 1;
  t.max_labels_per_sample = 3;
  return t;
}

models::HeadKind head_kind(const TaskSpec& task) {
  return task.kind == TaskKind::kMultiClass ? models::HeadKind::kMultiClass : models::HeadKind::kMultiLabel;
}

LabelOracle::LabelOracle(const TaskSpec& task, const LanguagePair& language) : task_(task) {
  const auto& content = language.content_words();
  const std::size_t needed = task.num_labels * task.markers_per_label;
  require(task.num_labels >= 1 && task.markers_per_label >= 1, ErrorCategory::kInvalidArgument,
          "task: needs at least one label and one marker per label");
  require(needed < content.size(), ErrorCategory::kInvalidArgument,
          "task: " + std::to_string(needed) + " markers need more than " + std::to_string(content.size()) +
              " content words");
  markers_.resize(task.num_labels);
  for (std::size_t i = 0; i < needed; ++i) {
    const std::size_t label = i / task.markers_per_label;
    markers_[label].push_back(content[i]);
    marker_label_[content[i]] = label;
  }
  filler_.assign(content.begin() + static_cast<std::ptrdiff_t>(needed), content.end());
  filler_.insert(filler_.end(), language.function_words().begin(), language.function_words().end());
}

models::LabelSet LabelOracle::operator()(const vocab::Sentence& high_resource) const {
  models::LabelSet labels;
  for (const std::string& tok : high_resource) {
    auto it = marker_label_.find(tok);
    if (it == marker_label_.end()) continue;
    if (task_.kind == TaskKind::kMultiClass) return {it->second};
    labels.push_back(it->second);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

const data::LabeledCorpus& DatasetBundle::fewshot(std::size_t k) const {
  if (k == kFewShotSmall) return fewshot_small;
  if (k == kFewShotLarge) return fewshot_large;
  fail(ErrorCategory::kInvalidArgument, "no few-shot pool of size " + std::to_string(k));
}

namespace {

vocab::Sentence task_sentence(const TaskSpec& task, const LabelOracle& oracle, const LanguagePair& lang,
                              const models::LabelSet& labels, nn::Rng& rng) {
  const std::size_t len = std::uniform_int_distribution<std::size_t>(task.min_length, task.max_length)(rng);
  const auto& content_filler = oracle.filler();
  const std::size_t content_count = content_filler.size() - lang.function_words().size();
  std::bernoulli_distribution function_word(kFunctionWordRate);
  vocab::Sentence s;
  for (std::size_t i = 0; i < len; ++i) {
    const bool fw = function_word(rng) && !lang.function_words().empty();
    s.push_back(fw ? lang.function_words()[uniform_index(rng, lang.function_words().size())]
                   : content_filler[uniform_index(rng, content_count)]);
  }
  std::vector<std::string> markers;
  if (task.kind == TaskKind::kMultiClass) {
    for (std::size_t m = 0; m < task.markers_per_sample; ++m) {
      const auto& pool = oracle.markers(labels[0]);
      markers.push_back(pool[uniform_index(rng, pool.size())]);
    }
  } else {
    for (std::size_t l : labels) {
      const auto& pool = oracle.markers(l);
      markers.push_back(pool[uniform_index(rng, pool.size())]);
    }
  }
  for (const std::string& m : markers) {
    const std::size_t pos = uniform_index(rng, s.size() + 1);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), m);
  }
  return s;
}

data::LabeledCorpus task_split(const TaskSpec& task, const LabelOracle& oracle, const LanguagePair& lang,
                               std::size_t n, nn::Rng& rng) {
  std::vector<models::LabelSet> labels;
  if (task.kind == TaskKind::kMultiClass) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back({i % task.num_labels});
    std::shuffle(labels.begin(), labels.end(), rng);
  } else {
    const std::size_t max_k = std::min(task.max_labels_per_sample, task.num_labels);
    std::vector<std::size_t> ids(task.num_labels);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_k)(rng);
      std::shuffle(ids.begin(), ids.end(), rng);
      models::LabelSet set(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(set.begin(), set.end());
      labels.push_back(std::move(set));
    }
  }
  data::LabeledCorpus out;
  out.reserve(n);
  for (auto& l : labels) {
    vocab::Sentence s = task_sentence(task, oracle, lang, l, rng);
    models::LabelSet gold = oracle(s);
    out.push_back({std::move(s), std::move(gold)});
  }
  return out;
}

data::LabeledCorpus translate_split(const LanguagePair& lang, const data::LabeledCorpus& hr, nn::Rng& rng) {
  data::LabeledCorpus out;
  out.reserve(hr.size());
  for (const auto& s : hr) out.push_back({lang.translate(s.text, rng), s.labels});
  return out;
}

}  // namespace

DatasetBundle gen_classification_dataset(const TaskSpec& task, const LanguageSpec& language, std::uint64_t seed) {
  require(task.min_length >= 1 && task.min_length <= task.max_length, ErrorCategory::kInvalidArgument,
          "task: bad length range");
  require(task.sizes.dev >= kFewShotSmall + kFewShotLarge + 1, ErrorCategory::kInvalidArgument,
          "task: dev split must hold both few-shot pools and a selection split");
  const LanguagePair lang(language);
  const LabelOracle oracle(task, lang);
  DatasetBundle b;
  b.task = task;
  b.language = language;
  b.seed = seed;
  nn::Rng train_rng = stream(seed, 21), dev_rng = stream(seed, 22), test_rng = stream(seed, 23);
  b.hr_train = task_split(task, oracle, lang, task.sizes.train, train_rng);
  b.hr_dev = task_split(task, oracle, lang, task.sizes.dev, dev_rng);
  b.hr_test = task_split(task, oracle, lang, task.sizes.test, test_rng);
  nn::Rng noise_rng = stream(seed, 24);
  b.tgt_train = translate_split(lang, b.hr_train, noise_rng);
  b.tgt_dev = translate_split(lang, b.hr_dev, noise_rng);
  b.tgt_test = translate_split(lang, b.hr_test, noise_rng);

  std::vector<std::size_t> order(b.tgt_dev.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::Rng carve_rng = stream(seed, 25);
  std::shuffle(order.begin(), order.end(), carve_rng);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& s = b.tgt_dev[order[i]];
    if (i < kFewShotSmall) b.fewshot_small.push_back(s);
    else if (i < kFewShotSmall + kFewShotLarge) b.fewshot_large.push_back(s);
    else b.selection_dev.push_back(s);
  }
  return b;
}

}  // namespace t3l::synth
