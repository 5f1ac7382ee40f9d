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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "t3l/data/corpus.hpp"
#include "t3l/nn/parameter.hpp"
#include "t3l/nn/tensor.hpp"
#include "t3l/vocab/vocabulary.hpp"

namespace t3l::testing {

inline nn::Tensor random_tensor(nn::Shape shape, nn::Rng& rng, double scale = 1.0) {
  return nn::uniform_tensor(std::move(shape), -scale, scale, rng);
}

inline std::size_t random_dim(nn::Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double max_abs_diff(const nn::Tensor& a, const nn::Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

// Specials plus tokens t00..t{n-1}, in that order.
inline vocab::Vocabulary token_vocab(std::size_t n) {
  vocab::Sentence all;
  for (std::size_t i = 0; i < n; ++i) {
    // Descending multiplicity pins the build order.
    for (std::size_t k = 0; k < n - i; ++k) all.push_back((i < 10 ? "t0" : "t") + std::to_string(i));
  }
  const std::vector<vocab::Corpus> corpora{{all}};
  return vocab::Vocabulary::build(corpora);
}

// Pairs whose target is a copy of the source.
inline data::ParallelCorpus copy_corpus(const vocab::Vocabulary& v, std::size_t n, std::size_t min_len,
                                        std::size_t max_len, nn::Rng& rng) {
  data::ParallelCorpus out;
  for (std::size_t i = 0; i < n; ++i) {
    vocab::Sentence s;
    const std::size_t len = random_dim(rng, min_len, max_len);
    for (std::size_t k = 0; k < len; ++k) {
      s.push_back(v.token(vocab::kSpecialTokens.size() + random_dim(rng, 0, v.size() - vocab::kSpecialTokens.size() - 1)));
    }
    out.push_back({s, s});
  }
  return out;
}

// A fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("t3l-test-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace t3l::testing
