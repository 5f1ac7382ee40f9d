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

#include "t3l/models/tc_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "t3l/error.hpp"
#include "t3l/models/mt_model.hpp"

namespace t3l::models {

std::string head_kind_name(HeadKind kind) {
  return kind == HeadKind::kMultiClass ? "multiclass" : "multilabel";
}

HeadKind parse_head_kind(const std::string& name) {
  if (name == "multiclass") return HeadKind::kMultiClass;
  if (name == "multilabel") return HeadKind::kMultiLabel;
  fail(ErrorCategory::kConfig, "unknown head kind '" + name + "'");
}

nlohmann::json to_json(const TcConfig& c) {
  return {{"d_model", c.d_model},     {"layers", c.layers},
          {"heads", c.heads},         {"ffn_dim", c.ffn_dim},
          {"max_length", c.max_length}, {"num_labels", c.num_labels},
          {"head", head_kind_name(c.head)}, {"activation", activation_name(c.activation)}};
}

TcConfig tc_config_from_json(const nlohmann::json& j) {
  TcConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.max_length = j.value("max_length", c.max_length);
  c.num_labels = j.value("num_labels", c.num_labels);
  c.head = parse_head_kind(j.value("head", std::string("multiclass")));
  c.activation = parse_activation(j.value("activation", std::string("gelu")));
  return c;
}

Prediction make_prediction(std::span<const double> logits, HeadKind head) {
  Prediction p;
  p.logits.assign(logits.begin(), logits.end());
  p.label = argmax(logits);
  p.ranking.resize(logits.size());
  std::iota(p.ranking.begin(), p.ranking.end(), std::size_t{0});
  std::stable_sort(p.ranking.begin(), p.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  if (head == HeadKind::kMultiClass) {
    const double mx = logits[p.label];
    double total = 0.0;
    p.scores.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) total += (p.scores[i] = std::exp(logits[i] - mx));
    for (double& s : p.scores) s /= total;
  } else {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-logits[i]));
      p.scores.push_back(s);
      if (s >= 0.5) p.positives.push_back(i);
    }
  }
  return p;
}

TcModel::TcModel(vocab::Vocabulary vocabulary, TcConfig config, std::uint64_t seed)
    : vocab_(std::move(vocabulary)), config_(config) {
  require(config_.d_model > 0 && config_.heads > 0 && config_.d_model % config_.heads == 0,
          ErrorCategory::kConfig, "tc: d_model must be a positive multiple of heads");
  require(config_.num_labels >= 1, ErrorCategory::kConfig, "tc: num_labels must be >= 1");
  require(config_.max_length >= 2, ErrorCategory::kConfig, "tc: max_length must be >= 2");
  nn::Rng rng(seed);
  const std::size_t d = config_.d_model;
  embedding_ = params_.add("embedding", nn::uniform_tensor({vocab_.size(), d}, -0.08, 0.08, rng));
  positions_ = params_.add("positions", nn::uniform_tensor({config_.max_length, d}, -0.08, 0.08, rng));
  for (std::size_t i = 0; i < config_.layers; ++i) {
    blocks_.push_back(add_encoder_block(params_, "encoder." + std::to_string(i), d, config_.ffn_dim, rng));
  }
  norm_ = add_norm(params_, "encoder.norm", d);
  head_ = add_linear(params_, "head", d, config_.num_labels, rng);
}

nn::Var TcModel::body(Forward& f, nn::Var embedded) {
  const std::size_t rows = embedded.value().rows();
  require(rows <= config_.max_length, ErrorCategory::kInvalidArgument,
          "tc: input of " + std::to_string(rows) + " rows exceeds max_length " +
              std::to_string(config_.max_length));
  std::vector<std::size_t> positions(rows);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  nn::Var x = nn::add(embedded, nn::gather_rows(f.param(positions_), positions));
  for (const EncoderBlock& block : blocks_) x = f.encoder(block, x);
  x = f.apply(norm_, x);
  const std::vector<double> mask(rows, 1.0);
  return f.apply(head_, nn::mean_pool(x, mask));
}

nn::Var TcModel::logits_from_tokens(nn::Tape& tape, std::span<const vocab::TokenId> ids) {
  require(!ids.empty(), ErrorCategory::kInvalidArgument, "tc: empty input");
  Forward f{tape, params_, config_.heads, config_.activation};
  std::vector<vocab::TokenId> with_cls{vocab::kCls};
  with_cls.insert(with_cls.end(), ids.begin(), ids.end());
  return body(f, nn::gather_rows(f.param(embedding_), with_cls));
}

nn::Var TcModel::logits_from_embeddings(nn::Tape& tape, nn::Var embeddings) {
  require(embeddings.value().cols() == config_.d_model, ErrorCategory::kShapeMismatch,
          "tc: embedding width " + std::to_string(embeddings.value().cols()) + " vs model width " +
              std::to_string(config_.d_model));
  require(embeddings.value().rows() >= 1, ErrorCategory::kInvalidArgument, "tc: empty input");
  Forward f{tape, params_, config_.heads, config_.activation};
  const vocab::TokenId cls = vocab::kCls;
  const nn::Var cls_row = nn::gather_rows(f.param(embedding_), std::span<const std::size_t>(&cls, 1));
  const nn::Var parts[] = {cls_row, embeddings};
  return body(f, nn::concat_rows(parts));
}

Prediction TcModel::classify_tokens(std::span<const vocab::TokenId> ids) {
  nn::Tape tape(false);
  return make_prediction(logits_from_tokens(tape, ids).value().values(), config_.head);
}

Prediction TcModel::classify_soft(const nn::Tensor& embeddings) {
  nn::Tape tape(false);
  const nn::Var input = tape.constant(embeddings);
  return make_prediction(logits_from_embeddings(tape, input).value().values(), config_.head);
}

nn::Var TcModel::loss(nn::Var logits, const LabelSet& labels) const {
  if (config_.head == HeadKind::kMultiClass) {
    require(labels.size() == 1, ErrorCategory::kInvalidArgument,
            "tc: multi-class sample needs exactly one label, got " + std::to_string(labels.size()));
    require(labels[0] < config_.num_labels, ErrorCategory::kOutOfRange,
            "tc: label " + std::to_string(labels[0]) + " outside [0, " + std::to_string(config_.num_labels) + ")");
    return nn::cross_entropy(logits, labels);
  }
  std::vector<double> targets(config_.num_labels, 0.0);
  for (std::size_t l : labels) {
    require(l < config_.num_labels, ErrorCategory::kOutOfRange,
            "tc: label " + std::to_string(l) + " outside [0, " + std::to_string(config_.num_labels) + ")");
    targets[l] = 1.0;
  }
  return nn::binary_cross_entropy(logits, targets);
}

std::vector<std::size_t> TcModel::layer_parameters(std::size_t layer) const {
  require(layer < layer_count(), ErrorCategory::kOutOfRange, "tc: no layer " + std::to_string(layer));
  auto out = blocks_[layer].parameter_indices();
  if (layer + 1 == blocks_.size()) {
    out.push_back(norm_.gain);
    out.push_back(norm_.shift);
  }
  return out;
}

std::vector<std::size_t> TcModel::head_parameters() const { return {head_.weight, head_.bias}; }

std::vector<std::size_t> TcModel::input_side_parameters() const { return {embedding_, positions_}; }

}  // namespace t3l::models
