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

// Pre-norm transformer blocks shared by the translator and the classifier.
// Blocks store parameter indices into the owning model's ParameterSet.

#include <cstddef>
#include <string>
#include <vector>

#include "t3l/nn/ops.hpp"
#include "t3l/nn/parameter.hpp"

namespace t3l::models {

enum class Activation { kGelu, kRelu };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

struct LinearLayer {
  std::size_t weight = 0;
  std::size_t bias = 0;
};

struct NormLayer {
  std::size_t gain = 0;
  std::size_t shift = 0;
};

struct AttentionBlock {
  LinearLayer query, key, value, output;
};

struct FeedForwardBlock {
  LinearLayer expand, contract;
};

struct EncoderBlock {
  NormLayer attn_norm;
  AttentionBlock attn;
  NormLayer ffn_norm;
  FeedForwardBlock ffn;

  std::vector<std::size_t> parameter_indices() const;
};

struct DecoderBlock {
  NormLayer self_norm;
  AttentionBlock self_attn;
  NormLayer cross_norm;
  AttentionBlock cross_attn;
  NormLayer ffn_norm;
  FeedForwardBlock ffn;

  std::vector<std::size_t> parameter_indices() const;
};

// Weights ~ N(0, 1/fan_in), zero bias.
LinearLayer add_linear(nn::ParameterSet& params, const std::string& prefix, std::size_t in,
                       std::size_t out, nn::Rng& rng);
NormLayer add_norm(nn::ParameterSet& params, const std::string& prefix, std::size_t dim);
AttentionBlock add_attention(nn::ParameterSet& params, const std::string& prefix, std::size_t dim,
                             nn::Rng& rng);
EncoderBlock add_encoder_block(nn::ParameterSet& params, const std::string& prefix, std::size_t dim,
                               std::size_t ffn_dim, nn::Rng& rng);
DecoderBlock add_decoder_block(nn::ParameterSet& params, const std::string& prefix, std::size_t dim,
                               std::size_t ffn_dim, nn::Rng& rng);

// Per-forward context: the tape, the parameters, and the block options.
struct Forward {
  nn::Tape& tape;
  nn::ParameterSet& params;
  std::size_t heads = 1;
  Activation activation = Activation::kGelu;
  double dropout = 0.0;
  nn::Rng* dropout_rng = nullptr;

  nn::Var param(std::size_t index) { return tape.parameter(params[index]); }
  nn::Var apply(const LinearLayer& layer, nn::Var x);
  nn::Var apply(const NormLayer& layer, nn::Var x);
  nn::Var drop(nn::Var x);
  // Multi-head scaled dot-product attention of `query` rows over `memory`.
  nn::Var attend(const AttentionBlock& block, nn::Var query, nn::Var memory, bool causal);
  nn::Var feed_forward(const FeedForwardBlock& block, nn::Var x);
  nn::Var encoder(const EncoderBlock& block, nn::Var x);
  nn::Var decoder(const DecoderBlock& block, nn::Var x, nn::Var memory);
};

}  // namespace t3l::models
