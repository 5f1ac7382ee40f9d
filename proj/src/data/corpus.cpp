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

#include "t3l/data/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "t3l/error.hpp"

namespace t3l::data {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::kIo, "cannot open " + path.string());
  return in;
}

std::pair<std::string, std::string> split_tab(const std::string& line, const std::filesystem::path& path,
                                              std::size_t lineno) {
  const auto tab = line.find('\t');
  require(tab != std::string::npos && line.find('\t', tab + 1) == std::string::npos, ErrorCategory::kFormat,
          path.string() + ":" + std::to_string(lineno) + ": expected exactly one tab");
  return {line.substr(0, tab), line.substr(tab + 1)};
}

}  // namespace

void write_parallel(const std::filesystem::path& path, const ParallelCorpus& corpus) {
  auto out = open_out(path);
  for (const auto& pair : corpus) out << vocab::join(pair.source) << '\t' << vocab::join(pair.target) << '\n';
}

ParallelCorpus read_parallel(const std::filesystem::path& path) {
  auto in = open_in(path);
  ParallelCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto [src, tgt] = split_tab(line, path, lineno);
    corpus.push_back({vocab::tokenize(src), vocab::tokenize(tgt)});
  }
  return corpus;
}

std::string format_labels(const models::LabelSet& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(labels[i]);
  }
  return out;
}

models::LabelSet parse_labels(const std::string& field) {
  models::LabelSet labels;
  std::stringstream ss(field);
  std::string item;
  while (std::getline(ss, item, ',')) {
    require(!item.empty() && std::all_of(item.begin(), item.end(), [](char c) { return c >= '0' && c <= '9'; }),
            ErrorCategory::kFormat, "bad label field '" + field + "'");
    labels.push_back(std::stoul(item));
  }
  return labels;
}

void write_labeled(const std::filesystem::path& path, const LabeledCorpus& corpus) {
  auto out = open_out(path);
  for (const auto& s : corpus) out << vocab::join(s.text) << '\t' << format_labels(s.labels) << '\n';
}

LabeledCorpus read_labeled(const std::filesystem::path& path) {
  auto in = open_in(path);
  LabeledCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto [text, labels] = split_tab(line, path, lineno);
    try {
      corpus.push_back({vocab::tokenize(text), parse_labels(labels)});
    } catch (const Error& e) {
      fail(ErrorCategory::kFormat, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

ParallelCorpus reversed(const ParallelCorpus& corpus) {
  ParallelCorpus out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) out.push_back({p.target, p.source});
  return out;
}

}  // namespace t3l::data
