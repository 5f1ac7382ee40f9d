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

#include "t3l/nn/optim.hpp"

#include <cmath>

#include "t3l/error.hpp"

namespace t3l::nn {

AdamWConfig translator_reference_preset() {
  AdamWConfig c;
  c.learning_rate = 3e-5;
  c.weight_decay = 0.01;
  c.warmup_steps = 500;
  c.max_grad_norm = 1.0;
  c.accumulation = 2;
  c.batch_size = 8;
  return c;
}

AdamWConfig classifier_reference_preset() {
  AdamWConfig c = translator_reference_preset();
  c.learning_rate = 3e-6;
  return c;
}

AdamWConfig joint_reference_preset() {
  AdamWConfig c;
  c.learning_rate = 3e-6;
  c.weight_decay = 0.01;
  c.warmup_steps = 0;
  c.max_grad_norm = 1.0;
  c.accumulation = 1;
  c.batch_size = 1;
  return c;
}

double clip_global_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    if (p->frozen || !p->has_grad()) continue;
    for (double g : p->grad.values()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params) {
      if (p->frozen || !p->has_grad()) continue;
      for (double& g : p->grad.values()) g *= factor;
    }
  }
  return norm;
}

AdamW::AdamW(AdamWConfig config, std::vector<Parameter*> params)
    : config_(config), params_(std::move(params)) {
  require(config_.learning_rate >= 0.0, ErrorCategory::kConfig, "adamw: negative learning rate");
  require(config_.accumulation >= 1, ErrorCategory::kConfig, "adamw: accumulation must be >= 1");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i]->frozen) continue;
    trainable_.push_back(i);
    const Shape& shape = params_[i]->value.shape();
    state_.moments.push_back({params_[i]->name, Tensor(shape), Tensor(shape)});
  }
}

double AdamW::learning_rate_at(std::size_t step) const {
  if (config_.warmup_steps > 0 && step < config_.warmup_steps) {
    return config_.learning_rate * static_cast<double>(step) /
           static_cast<double>(config_.warmup_steps);
  }
  return config_.learning_rate;
}

double AdamW::step() {
  std::vector<Parameter*> live;
  for (std::size_t i : trainable_) {
    Parameter* p = params_[i];
    if (p->frozen) continue;
    require(p->has_grad(), ErrorCategory::kState, "adamw: missing gradient for " + p->name);
    live.push_back(p);
  }
  const double inv_accum = 1.0 / static_cast<double>(config_.accumulation);
  if (config_.accumulation > 1) {
    for (Parameter* p : live) {
      for (double& g : p->grad.values()) g *= inv_accum;
    }
  }
  const double norm = clip_global_norm(live, config_.max_grad_norm);

  state_.step += 1;
  const double lr = learning_rate_at(state_.step);
  const double t = static_cast<double>(state_.step);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t slot = 0; slot < trainable_.size(); ++slot) {
    Parameter* p = params_[trainable_[slot]];
    if (p->frozen) continue;
    MomentState& m = state_.moments[slot];
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* m1 = m.first.data();
    double* m2 = m.second.data();
    const double decay = 1.0 - lr * config_.weight_decay;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      w[i] *= decay;
      m1[i] = config_.beta1 * m1[i] + (1.0 - config_.beta1) * g[i];
      m2[i] = config_.beta2 * m2[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = m1[i] / bias1;
      const double vhat = m2[i] / bias2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
  for (Parameter* p : params_) p->zero_grad();
  return norm;
}

void AdamW::load_state(const AdamWState& state) {
  require(state.moments.size() == state_.moments.size(), ErrorCategory::kFormat,
          "adamw: optimizer state has " + std::to_string(state.moments.size()) +
              " moment slots, expected " + std::to_string(state_.moments.size()));
  for (std::size_t i = 0; i < state.moments.size(); ++i) {
    require(state.moments[i].name == state_.moments[i].name, ErrorCategory::kFormat,
            "adamw: moment slot " + std::to_string(i) + " is " + state.moments[i].name +
                ", expected " + state_.moments[i].name);
    check_same_shape(state.moments[i].first, state_.moments[i].first, "adamw state");
  }
  state_ = state;
}

}  // namespace t3l::nn
