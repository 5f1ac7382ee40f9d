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

#include "t3l/nn/tape.hpp"

#include "t3l/error.hpp"

namespace t3l::nn {

const Tensor& Var::value() const { return tape->value(*this); }
bool Var::requires_grad() const { return tape->requires_grad(*this); }

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.requires_grad = grad_enabled_ && !p.frozen;
  if (n.requires_grad) n.param = &p;
  return push(std::move(n));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = grad_enabled_;
  return push(std::move(n));
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->grad : n.grad;
}

Tensor& Tape::grad_buffer(Var v) {
  Node& n = node(v);
  Tensor& g = n.param ? n.param->grad : n.grad;
  if (g.empty()) g = Tensor(n.get().shape());
  return g;
}

Var Tape::record(Tensor value, bool requires_grad, Backward backward) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = grad_enabled_ && requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::backward(Var loss, double seed) {
  require(loss.tape == this, ErrorCategory::kInvalidArgument, "backward: loss from another tape");
  require(value(loss).size() == 1, ErrorCategory::kShapeMismatch,
          "backward: loss must be a scalar, got " + shape_string(value(loss).shape()));
  if (!node(loss).requires_grad) return;
  grad_buffer(loss)[0] += seed;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad, n.get());
  }
}

}  // namespace t3l::nn
