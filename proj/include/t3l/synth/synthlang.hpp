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

// Deterministic synthetic language pairs and classification tasks.
//
// The high-resource language draws content words w00..wNN and a small set of
// function words. A target language is a cipher of it: function words are
// shared verbatim, content word w_i maps to a permuted cipher word c_k, and
// with probability `noise` a cipher word is replaced by its unique synonym
// s_k. Afterwards adjacent tokens are swapped with probability `reorder`
// (non-overlapping, scanning left to right). With noise = reorder = 0 the
// target sentence is an exact token-wise cipher of the source.

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "t3l/data/corpus.hpp"
#include "t3l/models/tc_model.hpp"
#include "t3l/nn/parameter.hpp"

namespace t3l::synth {

struct LanguageSpec {
  std::uint64_t seed = 7;
  std::size_t function_words = 8;
  std::size_t content_words = 48;
  double reorder = 0.0;
  double noise = 0.0;
  // Rates reached by degrade(spec, 1.0).
  double max_reorder = 0.6;
  double max_noise = 0.6;
};

nlohmann::json to_json(const LanguageSpec& s);
LanguageSpec language_from_json(const nlohmann::json& j);

// Raises noise and reorder linearly towards their maxima; severity in [0, 1].
LanguageSpec degrade_language(const LanguageSpec& spec, double severity);

class LanguagePair {
 public:
  explicit LanguagePair(LanguageSpec spec);

  const LanguageSpec& spec() const { return spec_; }
  const std::vector<std::string>& function_words() const { return function_words_; }
  const std::vector<std::string>& content_words() const { return content_; }

  // Cipher image of a high-resource token (identity for function words).
  const std::string& cipher(const std::string& token) const;
  const std::string& synonym_of_cipher(const std::string& cipher_token) const;
  // Maps a target-language token (cipher or synonym) back to the
  // high-resource token; function words map to themselves.
  const std::string& invert(const std::string& token) const;

  vocab::Sentence translate(const vocab::Sentence& high_resource, nn::Rng& rng) const;
  vocab::Sentence invert_sentence(const vocab::Sentence& target) const;

 private:
  LanguageSpec spec_;
  std::vector<std::string> function_words_;
  std::vector<std::string> content_;
  std::unordered_map<std::string, std::string> forward_;
  std::unordered_map<std::string, std::string> synonym_;
  std::unordered_map<std::string, std::string> backward_;
};

// Every token either side of the pair can emit, plus the specials.
vocab::Vocabulary shared_vocabulary(const LanguagePair& language);

struct CorpusSizes {
  std::size_t train = 5000;
  std::size_t dev = 500;
  std::size_t test = 500;
};

struct ParallelSplits {
  data::ParallelCorpus train, dev, test;
};

// General-domain sentences (content words drawn uniformly) paired with their
// target-language translations. Deterministic in (spec, sizes, seed).
ParallelSplits gen_language_pair(const LanguageSpec& spec, const CorpusSizes& sizes, std::uint64_t seed,
                                 std::size_t min_length = 6, std::size_t max_length = 12);

enum class TaskKind { kMultiClass, kMultiLabel };

// Each label owns `markers_per_label` content words. A sentence is random
// filler (content words that are not markers, plus function words) with the
// markers of its label(s) inserted at random positions.
struct TaskSpec {
  std::string name = "entailment3";
  TaskKind kind = TaskKind::kMultiClass;
  std::size_t num_labels = 3;
  std::size_t markers_per_label = 3;
  // Markers inserted per sample (multi-class) / max labels per sample (multi-label).
  std::size_t markers_per_sample = 1;
  std::size_t max_labels_per_sample = 3;
  std::size_t min_length = 6;
  std::size_t max_length = 12;
  CorpusSizes sizes;
};

nlohmann::json to_json(const TaskSpec& t);
TaskSpec task_from_json(const nlohmann::json& j);

// 3-class (entailment-like), 4-class (topic) and 21-label tasks.
TaskSpec entailment_task();
TaskSpec topic_task();
TaskSpec multilabel_task();

models::HeadKind head_kind(const TaskSpec& task);

// Public label oracle on high-resource sentences. Multi-class: the label of
// the first marker found. Multi-label: ascending ids of labels whose markers
// occur. Unmarked sentences yield an empty set.
class LabelOracle {
 public:
  LabelOracle(const TaskSpec& task, const LanguagePair& language);

  models::LabelSet operator()(const vocab::Sentence& high_resource) const;
  const std::vector<std::string>& markers(std::size_t label) const { return markers_[label]; }
  const std::vector<std::string>& filler() const { return filler_; }

 private:
  TaskSpec task_;
  std::vector<std::vector<std::string>> markers_;
  std::unordered_map<std::string, std::size_t> marker_label_;
  std::vector<std::string> filler_;
};

inline constexpr std::size_t kFewShotSmall = 10;
inline constexpr std::size_t kFewShotLarge = 100;

struct DatasetBundle {
  TaskSpec task;
  LanguageSpec language;
  std::uint64_t seed = 0;
  data::LabeledCorpus hr_train, hr_dev, hr_test;
  // Sample i is the translation of the matching high-resource sample i.
  data::LabeledCorpus tgt_train, tgt_dev, tgt_test;
  // Carved from tgt_dev: disjoint from each other and from tgt_test.
  data::LabeledCorpus fewshot_small, fewshot_large, selection_dev;

  const data::LabeledCorpus& fewshot(std::size_t k) const;
};

DatasetBundle gen_classification_dataset(const TaskSpec& task, const LanguageSpec& language, std::uint64_t seed);

}  // namespace t3l::synth
