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

#include "t3l/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "t3l/error.hpp"

namespace t3l::nn {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  require(data_.size() == shape_size(shape_), ErrorCategory::kShapeMismatch,
          "tensor: " + std::to_string(data_.size()) + " values do not fill shape " +
              shape_string(shape_));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    fail(ErrorCategory::kShapeMismatch, std::string(op) + ": shape mismatch " +
                                            shape_string(a.shape()) + " vs " +
                                            shape_string(b.shape()));
  }
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace t3l::nn
