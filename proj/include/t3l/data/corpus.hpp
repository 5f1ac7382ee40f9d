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

// On-disk corpus formats (UTF-8, one record per line):
//   parallel: <target-language text> TAB <high-resource text>
//   labeled:  <text> TAB <label id>            (multi-class)
//             <text> TAB <id>,<id>,...         (multi-label)

#include <filesystem>
#include <string>
#include <vector>

#include "t3l/models/tc_model.hpp"
#include "t3l/vocab/vocabulary.hpp"

namespace t3l::data {

struct ParallelPair {
  vocab::Sentence source;  // target language, fed to the translator
  vocab::Sentence target;  // high-resource language
};

struct LabeledSentence {
  vocab::Sentence text;
  models::LabelSet labels;
};

using ParallelCorpus = std::vector<ParallelPair>;
using LabeledCorpus = std::vector<LabeledSentence>;

void write_parallel(const std::filesystem::path& path, const ParallelCorpus& corpus);
ParallelCorpus read_parallel(const std::filesystem::path& path);

void write_labeled(const std::filesystem::path& path, const LabeledCorpus& corpus);
LabeledCorpus read_labeled(const std::filesystem::path& path);

std::string format_labels(const models::LabelSet& labels);
models::LabelSet parse_labels(const std::string& field);

// Swaps source and target sides.
ParallelCorpus reversed(const ParallelCorpus& corpus);

}  // namespace t3l::data
