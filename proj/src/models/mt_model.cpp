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

#include "t3l/models/mt_model.hpp"

#include <numeric>

#include "t3l/error.hpp"

namespace t3l::models {

nlohmann::json to_json(const MtConfig& c) {
  return {{"d_model", c.d_model},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"heads", c.heads},
          {"ffn_dim", c.ffn_dim},
          {"max_source_length", c.max_source_length},
          {"max_decode_length", c.max_decode_length},
          {"temperature", c.temperature},
          {"dropout", c.dropout},
          {"activation", activation_name(c.activation)}};
}

MtConfig mt_config_from_json(const nlohmann::json& j) {
  MtConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.heads = j.value("heads", c.heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.max_source_length = j.value("max_source_length", c.max_source_length);
  c.max_decode_length = j.value("max_decode_length", c.max_decode_length);
  c.temperature = j.value("temperature", c.temperature);
  c.dropout = j.value("dropout", c.dropout);
  c.activation = parse_activation(j.value("activation", std::string("gelu")));
  return c;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

MtModel::MtModel(vocab::Vocabulary vocabulary, MtConfig config, std::uint64_t seed)
    : vocab_(std::move(vocabulary)), config_(config), dropout_rng_(seed ^ 0x9e3779b97f4a7c15ull) {
  require(config_.d_model > 0 && config_.heads > 0 && config_.d_model % config_.heads == 0,
          ErrorCategory::kConfig, "mt: d_model must be a positive multiple of heads");
  require(config_.max_decode_length >= 1, ErrorCategory::kConfig, "mt: max_decode_length must be >= 1");
  require(config_.temperature > 0.0, ErrorCategory::kConfig, "mt: temperature must be > 0");
  nn::Rng rng(seed);
  const std::size_t v = vocab_.size(), d = config_.d_model;
  source_embedding_ = params_.add("source.embedding", nn::uniform_tensor({v, d}, -0.08, 0.08, rng));
  source_positions_ =
      params_.add("source.positions", nn::uniform_tensor({config_.max_source_length, d}, -0.08, 0.08, rng));
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    encoder_.push_back(add_encoder_block(params_, "encoder." + std::to_string(i), d, config_.ffn_dim, rng));
  }
  encoder_norm_ = add_norm(params_, "encoder.norm", d);
  target_embedding_ = params_.add("target.embedding", nn::uniform_tensor({v, d}, -0.08, 0.08, rng));
  target_positions_ =
      params_.add("target.positions", nn::uniform_tensor({config_.max_decode_length, d}, -0.08, 0.08, rng));
  for (std::size_t i = 0; i < config_.decoder_layers; ++i) {
    decoder_.push_back(add_decoder_block(params_, "decoder." + std::to_string(i), d, config_.ffn_dim, rng));
  }
  decoder_norm_ = add_norm(params_, "decoder.norm", d);
  projection_ = add_linear(params_, "decoder.projection", d, v, rng);
}

void MtModel::set_training(bool training, std::uint64_t dropout_seed) {
  training_ = training;
  dropout_rng_.seed(dropout_seed);
}

Forward MtModel::context(nn::Tape& tape) {
  Forward f{tape, params_, config_.heads, config_.activation};
  if (training_ && tape.grad_enabled()) {
    f.dropout = config_.dropout;
    f.dropout_rng = &dropout_rng_;
  }
  return f;
}

void MtModel::check_source(std::span<const vocab::TokenId> source) const {
  require(!source.empty(), ErrorCategory::kInvalidArgument, "mt: empty source");
  require(source.size() <= config_.max_source_length, ErrorCategory::kInvalidArgument,
          "mt: source length " + std::to_string(source.size()) + " exceeds " +
              std::to_string(config_.max_source_length));
}

namespace {

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

nn::Var MtModel::encode(nn::Tape& tape, std::span<const vocab::TokenId> source) {
  check_source(source);
  Forward f = context(tape);
  const auto positions = iota(source.size());
  nn::Var x = nn::add(nn::gather_rows(f.param(source_embedding_), source),
                      nn::gather_rows(f.param(source_positions_), positions));
  x = f.drop(x);
  for (const EncoderBlock& block : encoder_) x = f.encoder(block, x);
  return f.apply(encoder_norm_, x);
}

nn::Var MtModel::decoder_logits(nn::Tape& tape, nn::Var memory, std::span<const vocab::TokenId> decoder_input) {
  require(!decoder_input.empty(), ErrorCategory::kInvalidArgument, "mt: empty decoder input");
  require(decoder_input.size() <= config_.max_decode_length, ErrorCategory::kInvalidArgument,
          "mt: decoder input length " + std::to_string(decoder_input.size()) + " exceeds " +
              std::to_string(config_.max_decode_length));
  Forward f = context(tape);
  const auto positions = iota(decoder_input.size());
  nn::Var x = nn::add(nn::gather_rows(f.param(target_embedding_), decoder_input),
                      nn::gather_rows(f.param(target_positions_), positions));
  x = f.drop(x);
  for (const DecoderBlock& block : decoder_) x = f.decoder(block, x, memory);
  return f.apply(projection_, f.apply(decoder_norm_, x));
}

nn::Var MtModel::decode_step(nn::Tape& tape, std::span<const vocab::TokenId> source,
                             std::span<const vocab::TokenId> previous) {
  require(!previous.empty() && previous.front() == vocab::kBos, ErrorCategory::kInvalidArgument,
          "mt: decoder prefix must start with BOS");
  const nn::Var logits = decoder_logits(tape, encode(tape, source), previous);
  const std::size_t row = previous.size() - 1;
  const nn::Var picked = nn::gather_rows(logits, std::span<const std::size_t>(&row, 1));
  return nn::softmax(picked, config_.temperature);
}

nn::Tensor MtModel::decode_step(std::span<const vocab::TokenId> source, std::span<const vocab::TokenId> previous) {
  nn::Tape tape(false);
  return decode_step(tape, source, previous).value();
}

std::vector<vocab::TokenId> MtModel::greedy_decode(std::span<const vocab::TokenId> source) {
  nn::Tape tape(false);
  const nn::Var memory = encode(tape, source);
  std::vector<vocab::TokenId> prefix{vocab::kBos};
  std::vector<vocab::TokenId> out;
  while (out.size() < config_.max_decode_length) {
    const nn::Tensor& logits = decoder_logits(tape, memory, prefix).value();
    const std::size_t next = argmax(logits.row_span(logits.rows() - 1));
    out.push_back(next);
    if (next == vocab::kEos) break;
    prefix.push_back(next);
  }
  return out;
}

SoftTranslation MtModel::soft_decode(nn::Tape& tape, std::span<const vocab::TokenId> source) {
  SoftTranslation st;
  st.tokens = greedy_decode(source);
  std::vector<vocab::TokenId> inputs{vocab::kBos};
  inputs.insert(inputs.end(), st.tokens.begin(), st.tokens.end() - 1);
  const nn::Var logits = decoder_logits(tape, encode(tape, source), inputs);
  st.probabilities = nn::softmax(logits, config_.temperature);
  if (!(training_ && config_.dropout > 0.0)) {
    const nn::Tensor& p = st.probabilities.value();
    for (std::size_t j = 0; j < st.tokens.size(); ++j) {
      require(argmax(p.row_span(j)) == st.tokens[j], ErrorCategory::kState,
              "mt: soft pass disagrees with greedy decode at step " + std::to_string(j));
    }
  }
  return st;
}

nn::Var MtModel::teacher_forced_loss(nn::Tape& tape, std::span<const vocab::TokenId> source,
                                     std::span<const vocab::TokenId> target) {
  require(target.size() >= 2 && target.front() == vocab::kBos, ErrorCategory::kInvalidArgument,
          "mt: target must be BOS ... EOS");
  const nn::Var logits = decoder_logits(tape, encode(tape, source), target.first(target.size() - 1));
  return nn::cross_entropy(logits, target.subspan(1));
}

std::vector<std::size_t> MtModel::layer_parameters(std::size_t layer) const {
  require(layer < layer_count(), ErrorCategory::kOutOfRange, "mt: no layer " + std::to_string(layer));
  if (layer < encoder_.size()) {
    auto out = encoder_[layer].parameter_indices();
    if (layer + 1 == encoder_.size()) {
      out.push_back(encoder_norm_.gain);
      out.push_back(encoder_norm_.shift);
    }
    return out;
  }
  return decoder_[layer - encoder_.size()].parameter_indices();
}

std::vector<std::size_t> MtModel::source_embedding_parameters() const {
  return {source_embedding_, source_positions_};
}

std::vector<std::size_t> MtModel::output_side_parameters() const {
  return {target_embedding_, target_positions_, decoder_norm_.gain, decoder_norm_.shift,
          projection_.weight, projection_.bias};
}

}  // namespace t3l::models
