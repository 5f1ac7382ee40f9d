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

#include <cstdint>
#include <deque>
#include <functional>

#include "t3l/nn/parameter.hpp"
#include "t3l/nn/tensor.hpp"

namespace t3l::nn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid for the lifetime
// of the tape that produced it.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  bool requires_grad() const;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so a backward
// pass is a single reverse sweep. Parameter leaves accumulate straight into
// Parameter::grad; frozen parameters (and every parameter when gradients are
// disabled) enter as constants and never receive a gradient.
class Tape {
 public:
  // Receives the tape, the node's accumulated gradient and its value.
  using Backward = std::function<void(Tape&, const Tensor& grad, const Tensor& value)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var parameter(Parameter& p);
  Var constant(Tensor value);
  // A free input that collects a gradient (when gradients are enabled).
  Var variable(Tensor value);

  const Tensor& value(Var v) const { return node(v).get(); }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Gradient accumulated for v by backward(); empty if v was not reached.
  const Tensor& grad(Var v) const;
  // Zero-initialised on first use. Only valid for nodes that require grad.
  Tensor& grad_buffer(Var v);

  Var record(Tensor value, bool requires_grad, Backward backward);

  // Seeds d(loss)/d(loss) = seed and sweeps the tape in reverse. The loss
  // must hold exactly one element.
  void backward(Var loss, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Parameter* param = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;

    const Tensor& get() const { return external ? *external : owned; }
  };

  Node& node(Var v) { return nodes_[v.id]; }
  const Node& node(Var v) const { return nodes_[v.id]; }
  Var push(Node n);

  bool grad_enabled_;
  std::deque<Node> nodes_;
};

}  // namespace t3l::nn
