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
#include <functional>
#include <span>
#include <string>

#include "t3l/nn/parameter.hpp"
#include "t3l/nn/tape.hpp"

namespace t3l::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Builds the loss on the given tape. Must be deterministic.
using LossBuilder = std::function<Var(Tape&)>;

// Relative error used by the checker: |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

// Compares backprop gradients against central differences
// (f(x+eps) - f(x-eps)) / (2 eps) on up to `samples` coordinates drawn
// uniformly from the non-frozen parameters. Frozen parameters are never
// sampled. Parameter values are restored afterwards and gradients cleared.
GradCheckResult finite_difference_check(const LossBuilder& loss, std::span<Parameter* const> params,
                                        double eps, std::size_t samples, Rng& rng);

}  // namespace t3l::nn
