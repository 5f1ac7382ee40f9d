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

#include "t3l/nn/parameter.hpp"

#include "t3l/error.hpp"

namespace t3l::nn {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  require(!contains(name), ErrorCategory::kInvalidArgument, "duplicate parameter name " + name);
  params_.push_back(Parameter{std::move(name), std::move(value), Tensor(), false});
  return params_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  fail(ErrorCategory::kOutOfRange, "no parameter named " + name);
}

bool ParameterSet::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::size_t ParameterSet::trainable_element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (!p.frozen) n += p.value.size();
  }
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void ParameterSet::set_frozen(bool frozen) {
  for (auto& p : params_) p.frozen = frozen;
}

Tensor uniform_tensor(Shape shape, double low, double high, Rng& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(low, high);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace t3l::nn
