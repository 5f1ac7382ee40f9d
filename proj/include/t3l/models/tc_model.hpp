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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "t3l/models/transformer.hpp"
#include "t3l/nn/tape.hpp"
#include "t3l/vocab/vocabulary.hpp"

namespace t3l::models {

enum class HeadKind { kMultiClass, kMultiLabel };

std::string head_kind_name(HeadKind kind);
HeadKind parse_head_kind(const std::string& name);

struct TcConfig {
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t ffn_dim = 128;
  // Includes the prepended CLS row.
  std::size_t max_length = 34;
  std::size_t num_labels = 3;
  HeadKind head = HeadKind::kMultiClass;
  Activation activation = Activation::kGelu;
};

nlohmann::json to_json(const TcConfig& c);
TcConfig tc_config_from_json(const nlohmann::json& j);

// Multi-class: exactly one id. Multi-label: the set of positive label ids.
using LabelSet = std::vector<std::size_t>;

struct Prediction {
  std::vector<double> logits;
  // Argmax of the logits, lowest index on ties.
  std::size_t label = 0;
  // Softmax probabilities (multi-class) or per-label sigmoids (multi-label).
  std::vector<double> scores;
  // Label ids by descending logit, ties by ascending id.
  std::vector<std::size_t> ranking;
  // Labels with sigmoid >= 0.5 (multi-label heads only).
  LabelSet positives;
};

Prediction make_prediction(std::span<const double> logits, HeadKind head);

// Encoder-only classifier with an explicit token embedding table E (V x d).
// Input rows are [E[CLS]; x_1..x_n] plus learned positions, then pre-norm
// encoder blocks, masked mean pooling and a linear head.
class TcModel {
 public:
  TcModel(vocab::Vocabulary vocabulary, TcConfig config, std::uint64_t seed);

  const TcConfig& config() const { return config_; }
  const vocab::Vocabulary& vocabulary() const { return vocab_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  std::size_t embedding_index() const { return embedding_; }
  nn::Var embedding_table(nn::Tape& tape) { return tape.parameter(params_[embedding_]); }

  // Logits [1, num_labels] from token ids (CLS is prepended here).
  nn::Var logits_from_tokens(nn::Tape& tape, std::span<const vocab::TokenId> ids);
  // Logits from precomputed input embeddings [m, d] standing in for the
  // token lookup; the CLS row is still taken from E.
  nn::Var logits_from_embeddings(nn::Tape& tape, nn::Var embeddings);

  Prediction classify_tokens(std::span<const vocab::TokenId> ids);
  Prediction classify_soft(const nn::Tensor& embeddings);

  // Cross-entropy (multi-class) or mean per-label BCE (multi-label).
  nn::Var loss(nn::Var logits, const LabelSet& labels) const;

  // Freezing units from the input side; the last block owns the output norm.
  std::size_t layer_count() const { return blocks_.size(); }
  std::vector<std::size_t> layer_parameters(std::size_t layer) const;
  std::vector<std::size_t> head_parameters() const;
  std::vector<std::size_t> input_side_parameters() const;

 private:
  nn::Var body(Forward& f, nn::Var embedded);

  vocab::Vocabulary vocab_;
  TcConfig config_;
  nn::ParameterSet params_;
  std::size_t embedding_ = 0;
  std::size_t positions_ = 0;
  std::vector<EncoderBlock> blocks_;
  NormLayer norm_;
  LinearLayer head_;
};

}  // namespace t3l::models
