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

// Differentiable primitives. Inputs are viewed as rows x cols matrices; every
// op checks shapes and records its backward rule on the inputs' tape.

#include <cstddef>
#include <span>
#include <vector>

#include "t3l/nn/parameter.hpp"
#include "t3l/nn/tape.hpp"

namespace t3l::nn {

// [m,k] x [k,n] -> [m,n]
Var matmul(Var a, Var b);
// [m,k] x [n,k]^T -> [m,n]
Var matmul_nt(Var a, Var b);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

// x[r,in] * w[in,out] + bias[1,out]
Var linear(Var x, Var w, Var bias);

// Rows of table[V,d] selected by ids -> [ids.size(), d].
Var gather_rows(Var table, std::span<const std::size_t> ids);

// Row-wise softmax of x / temperature. With causal set, row i only attends to
// columns j <= i; masked entries are exactly zero.
Var softmax(Var x, double temperature = 1.0, bool causal = false);
Tensor softmax_values(const Tensor& x, double temperature = 1.0);

Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var relu(Var x);
Var gelu(Var x);

// Mean over rows whose mask entry is nonzero -> [1, cols].
Var mean_pool(Var x, std::span<const double> mask);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t count);

// Inverted dropout with a fixed mask drawn from rng; identity when rate is 0.
Var dropout(Var x, double rate, Rng& rng);

Var sum(Var x);

// Mean over rows of -log softmax(logits[r])[targets[r]].
Var cross_entropy(Var logits, std::span<const std::size_t> targets);
// Mean over labels of the logistic loss; targets must be 0 or 1.
Var binary_cross_entropy(Var logits, std::span<const double> targets);

}  // namespace t3l::nn
