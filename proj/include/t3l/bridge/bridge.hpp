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

// Soft-translation coupling: each translator distribution p_j is turned into
// the classifier's expected input embedding  e_j = sum_v p_j[v] * E[v]  (a
// row-vector product p_j^T E), which the classifier consumes in place of its
// token lookup. Mass on special tokens is kept; nothing is renormalised.

#include <cstddef>
#include <span>

#include "t3l/models/mt_model.hpp"
#include "t3l/models/tc_model.hpp"
#include "t3l/nn/tape.hpp"

namespace t3l::bridge {

inline constexpr double kSimplexTolerance = 1e-9;

struct ExpectedEmbeddingSequence {
  nn::Var embeddings;  // [m, d]
  std::size_t length = 0;
};

// Throws unless every row is non-negative (within tolerance) and sums to 1.
void check_simplex(const nn::Tensor& probabilities, double tolerance = kSimplexTolerance);

// p [1, V] (or a plain vector) times E [V, d] -> [1, d].
nn::Tensor expected_embedding(std::span<const double> p, const nn::Tensor& table);

// Differentiable in both arguments: [m, V] x [V, d] -> [m, d].
nn::Var expected_embeddings(nn::Var probabilities, nn::Var table);

ExpectedEmbeddingSequence bridge_sequence(nn::Tape& tape, const models::SoftTranslation& translation,
                                          models::TcModel& classifier);

}  // namespace t3l::bridge
