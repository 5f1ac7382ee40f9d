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

#include "t3l/models/transformer.hpp"

#include <cmath>

#include "t3l/error.hpp"

namespace t3l::models {

Activation parse_activation(const std::string& name) {
  if (name == "gelu") return Activation::kGelu;
  if (name == "relu") return Activation::kRelu;
  fail(ErrorCategory::kConfig, "unknown activation '" + name + "'");
}

std::string activation_name(Activation a) { return a == Activation::kGelu ? "gelu" : "relu"; }

namespace {

void append(std::vector<std::size_t>& out, const LinearLayer& l) {
  out.push_back(l.weight);
  out.push_back(l.bias);
}
void append(std::vector<std::size_t>& out, const NormLayer& l) {
  out.push_back(l.gain);
  out.push_back(l.shift);
}
void append(std::vector<std::size_t>& out, const AttentionBlock& b) {
  append(out, b.query);
  append(out, b.key);
  append(out, b.value);
  append(out, b.output);
}
void append(std::vector<std::size_t>& out, const FeedForwardBlock& b) {
  append(out, b.expand);
  append(out, b.contract);
}

}  // namespace

std::vector<std::size_t> EncoderBlock::parameter_indices() const {
  std::vector<std::size_t> out;
  append(out, attn_norm);
  append(out, attn);
  append(out, ffn_norm);
  append(out, ffn);
  return out;
}

std::vector<std::size_t> DecoderBlock::parameter_indices() const {
  std::vector<std::size_t> out;
  append(out, self_norm);
  append(out, self_attn);
  append(out, cross_norm);
  append(out, cross_attn);
  append(out, ffn_norm);
  append(out, ffn);
  return out;
}

LinearLayer add_linear(nn::ParameterSet& params, const std::string& prefix, std::size_t in,
                       std::size_t out, nn::Rng& rng) {
  LinearLayer l;
  l.weight = params.add(prefix + ".weight",
                        nn::normal_tensor({in, out}, 1.0 / std::sqrt(static_cast<double>(in)), rng));
  l.bias = params.add(prefix + ".bias", nn::Tensor({1, out}));
  return l;
}

NormLayer add_norm(nn::ParameterSet& params, const std::string& prefix, std::size_t dim) {
  NormLayer l;
  l.gain = params.add(prefix + ".gain", nn::Tensor({1, dim}, 1.0));
  l.shift = params.add(prefix + ".shift", nn::Tensor({1, dim}));
  return l;
}

AttentionBlock add_attention(nn::ParameterSet& params, const std::string& prefix, std::size_t dim,
                             nn::Rng& rng) {
  AttentionBlock b;
  b.query = add_linear(params, prefix + ".query", dim, dim, rng);
  b.key = add_linear(params, prefix + ".key", dim, dim, rng);
  b.value = add_linear(params, prefix + ".value", dim, dim, rng);
  b.output = add_linear(params, prefix + ".output", dim, dim, rng);
  return b;
}

EncoderBlock add_encoder_block(nn::ParameterSet& params, const std::string& prefix, std::size_t dim,
                               std::size_t ffn_dim, nn::Rng& rng) {
  EncoderBlock b;
  b.attn_norm = add_norm(params, prefix + ".attn_norm", dim);
  b.attn = add_attention(params, prefix + ".attn", dim, rng);
  b.ffn_norm = add_norm(params, prefix + ".ffn_norm", dim);
  b.ffn.expand = add_linear(params, prefix + ".ffn.expand", dim, ffn_dim, rng);
  b.ffn.contract = add_linear(params, prefix + ".ffn.contract", ffn_dim, dim, rng);
  return b;
}

DecoderBlock add_decoder_block(nn::ParameterSet& params, const std::string& prefix, std::size_t dim,
                               std::size_t ffn_dim, nn::Rng& rng) {
  DecoderBlock b;
  b.self_norm = add_norm(params, prefix + ".self_norm", dim);
  b.self_attn = add_attention(params, prefix + ".self_attn", dim, rng);
  b.cross_norm = add_norm(params, prefix + ".cross_norm", dim);
  b.cross_attn = add_attention(params, prefix + ".cross_attn", dim, rng);
  b.ffn_norm = add_norm(params, prefix + ".ffn_norm", dim);
  b.ffn.expand = add_linear(params, prefix + ".ffn.expand", dim, ffn_dim, rng);
  b.ffn.contract = add_linear(params, prefix + ".ffn.contract", ffn_dim, dim, rng);
  return b;
}

nn::Var Forward::apply(const LinearLayer& layer, nn::Var x) {
  return nn::linear(x, param(layer.weight), param(layer.bias));
}

nn::Var Forward::apply(const NormLayer& layer, nn::Var x) {
  return nn::layer_norm(x, param(layer.gain), param(layer.shift));
}

nn::Var Forward::drop(nn::Var x) {
  if (dropout <= 0.0 || dropout_rng == nullptr) return x;
  return nn::dropout(x, dropout, *dropout_rng);
}

nn::Var Forward::attend(const AttentionBlock& block, nn::Var query, nn::Var memory, bool causal) {
  const nn::Var q = apply(block.query, query);
  const nn::Var k = apply(block.key, memory);
  const nn::Var v = apply(block.value, memory);
  const std::size_t dim = q.value().cols();
  require(heads > 0 && dim % heads == 0, ErrorCategory::kConfig,
          "attention: model width " + std::to_string(dim) + " not divisible by " + std::to_string(heads) +
              " heads");
  const std::size_t head_dim = dim / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<nn::Var> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const nn::Var qh = heads == 1 ? q : nn::slice_cols(q, h * head_dim, head_dim);
    const nn::Var kh = heads == 1 ? k : nn::slice_cols(k, h * head_dim, head_dim);
    const nn::Var vh = heads == 1 ? v : nn::slice_cols(v, h * head_dim, head_dim);
    const nn::Var weights = nn::softmax(nn::scale(nn::matmul_nt(qh, kh), inv_scale), 1.0, causal);
    outputs.push_back(nn::matmul(weights, vh));
  }
  const nn::Var merged = heads == 1 ? outputs[0] : nn::concat_cols(outputs);
  return apply(block.output, merged);
}

nn::Var Forward::feed_forward(const FeedForwardBlock& block, nn::Var x) {
  nn::Var hidden = apply(block.expand, x);
  hidden = activation == Activation::kGelu ? nn::gelu(hidden) : nn::relu(hidden);
  return apply(block.contract, drop(hidden));
}

nn::Var Forward::encoder(const EncoderBlock& block, nn::Var x) {
  const nn::Var normed = apply(block.attn_norm, x);
  x = nn::add(x, drop(attend(block.attn, normed, normed, false)));
  return nn::add(x, drop(feed_forward(block.ffn, apply(block.ffn_norm, x))));
}

nn::Var Forward::decoder(const DecoderBlock& block, nn::Var x, nn::Var memory) {
  const nn::Var normed = apply(block.self_norm, x);
  x = nn::add(x, drop(attend(block.self_attn, normed, normed, true)));
  x = nn::add(x, drop(attend(block.cross_attn, apply(block.cross_norm, x), memory, false)));
  return nn::add(x, drop(feed_forward(block.ffn, apply(block.ffn_norm, x))));
}

}  // namespace t3l::models
