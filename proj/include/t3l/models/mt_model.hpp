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
#include <vector>

#include "json.hpp"
#include "t3l/models/transformer.hpp"
#include "t3l/nn/tape.hpp"
#include "t3l/vocab/vocabulary.hpp"

namespace t3l::models {

struct MtConfig {
  std::size_t d_model = 64;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 2;
  std::size_t ffn_dim = 128;
  std::size_t max_source_length = 32;
  std::size_t max_decode_length = 32;
  double temperature = 1.0;
  double dropout = 0.0;
  Activation activation = Activation::kGelu;
};

nlohmann::json to_json(const MtConfig& c);
MtConfig mt_config_from_json(const nlohmann::json& j);

// Per-step distributions p_1..p_m (rows of `probabilities`, m x V) and the
// greedy tokens t_1..t_m. Row j's argmax is t_j; the last step is the one
// that produced EOS unless the decode hit max_decode_length.
struct SoftTranslation {
  nn::Var probabilities;
  std::vector<vocab::TokenId> tokens;

  std::size_t length() const { return tokens.size(); }
};

// Encoder-decoder translator over the shared vocabulary.
class MtModel {
 public:
  MtModel(vocab::Vocabulary vocabulary, MtConfig config, std::uint64_t seed);

  const MtConfig& config() const { return config_; }
  const vocab::Vocabulary& vocabulary() const { return vocab_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  // Enables dropout (when configured) with a dropout stream seeded here.
  void set_training(bool training, std::uint64_t dropout_seed = 0);
  bool training() const { return training_; }

  nn::Var encode(nn::Tape& tape, std::span<const vocab::TokenId> source);
  // Logits for every decoder input position: rows = decoder_input.size(), cols = V.
  nn::Var decoder_logits(nn::Tape& tape, nn::Var memory, std::span<const vocab::TokenId> decoder_input);

  // p_j for the next token given the source and a BOS-initial prefix.
  nn::Var decode_step(nn::Tape& tape, std::span<const vocab::TokenId> source,
                      std::span<const vocab::TokenId> previous);
  nn::Tensor decode_step(std::span<const vocab::TokenId> source, std::span<const vocab::TokenId> previous);

  // Argmax decoding (lowest index on ties) fed back step by step; stops after
  // EOS or max_decode_length tokens. The returned tokens exclude BOS.
  std::vector<vocab::TokenId> greedy_decode(std::span<const vocab::TokenId> source);

  // Greedy decode, then one differentiable pass over [BOS, t_1..t_{m-1}]
  // yielding every p_j on `tape`. The hard tokens carry no gradient.
  SoftTranslation soft_decode(nn::Tape& tape, std::span<const vocab::TokenId> source);

  // Teacher-forced mean token cross-entropy; target is BOS ... EOS.
  nn::Var teacher_forced_loss(nn::Tape& tape, std::span<const vocab::TokenId> source,
                              std::span<const vocab::TokenId> target);

  // Freezing units ordered from the input side: encoder blocks (the last one
  // also owns the encoder output norm), then decoder blocks.
  std::size_t layer_count() const { return encoder_.size() + decoder_.size(); }
  std::vector<std::size_t> layer_parameters(std::size_t layer) const;
  // Source token and position tables.
  std::vector<std::size_t> source_embedding_parameters() const;
  // Decoder-side tables, decoder output norm and projection.
  std::vector<std::size_t> output_side_parameters() const;

 private:
  Forward context(nn::Tape& tape);
  void check_source(std::span<const vocab::TokenId> source) const;

  vocab::Vocabulary vocab_;
  MtConfig config_;
  nn::ParameterSet params_;
  std::size_t source_embedding_ = 0;
  std::size_t source_positions_ = 0;
  std::size_t target_embedding_ = 0;
  std::size_t target_positions_ = 0;
  std::vector<EncoderBlock> encoder_;
  NormLayer encoder_norm_;
  std::vector<DecoderBlock> decoder_;
  NormLayer decoder_norm_;
  LinearLayer projection_;
  bool training_ = false;
  nn::Rng dropout_rng_;
};

std::size_t argmax(std::span<const double> values);

}  // namespace t3l::models
