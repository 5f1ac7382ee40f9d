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
#include <span>
#include <string>
#include <vector>

#include "t3l/nn/parameter.hpp"

namespace t3l::nn {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  std::size_t warmup_steps = 0;
  double max_grad_norm = 1.0;
  std::size_t accumulation = 1;
  std::size_t batch_size = 1;
};

// Hyperparameters of the pretrained-scale recipe, kept as reference presets:
// translator, classifier, and joint fine-tuning respectively.
AdamWConfig translator_reference_preset();
AdamWConfig classifier_reference_preset();
AdamWConfig joint_reference_preset();

struct MomentState {
  std::string name;
  Tensor first;
  Tensor second;
};

struct AdamWState {
  std::size_t step = 0;
  std::vector<MomentState> moments;
};

// Rescales the gradients of the non-frozen parameters so their global L2 norm
// is at most max_norm. Returns the norm before clipping.
double clip_global_norm(std::span<Parameter* const> params, double max_norm);

// Decoupled-weight-decay Adam with linear warmup (0 -> lr over warmup_steps,
// then constant). Gradients are the sum over micro-batches; step() divides by
// the accumulation factor, clips the averaged gradient, updates, and clears
// all gradients.
class AdamW {
 public:
  AdamW(AdamWConfig config, std::vector<Parameter*> params);

  // Returns the gradient norm before clipping.
  double step();

  double learning_rate_at(std::size_t step) const;
  std::size_t step_count() const { return state_.step; }
  const AdamWConfig& config() const { return config_; }

  const AdamWState& state() const { return state_; }
  // Restores moments by parameter name; names must match this optimizer's.
  void load_state(const AdamWState& state);

 private:
  AdamWConfig config_;
  std::vector<Parameter*> params_;
  std::vector<std::size_t> trainable_;  // params_ index for each moment slot
  AdamWState state_;
};

}  // namespace t3l::nn
