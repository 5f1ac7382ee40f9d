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
#include <random>
#include <string>
#include <vector>

#include "t3l/nn/tensor.hpp"

namespace t3l::nn {

struct Parameter {
  std::string name;
  Tensor value;
  // Empty until a backward pass touches the parameter; cleared by the
  // optimizer after each step.
  Tensor grad;
  bool frozen = false;

  bool has_grad() const { return !grad.empty(); }
  void zero_grad() { grad = Tensor(); }
};

// Ordered collection of named parameters owned by one model. Modules refer
// to entries by index, so copies of a model stay self-consistent.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Throws out_of_range if absent.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t element_count() const;
  std::size_t trainable_element_count() const;

  void zero_grad();
  void set_frozen(bool frozen);

 private:
  std::vector<Parameter> params_;
};

using Rng = std::mt19937_64;

Tensor uniform_tensor(Shape shape, double low, double high, Rng& rng);
Tensor normal_tensor(Shape shape, double stddev, Rng& rng);

}  // namespace t3l::nn
