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

#include "t3l/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace t3l::nn {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult finite_difference_check(const LossBuilder& loss, std::span<Parameter* const> params,
                                        double eps, std::size_t samples, Rng& rng) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }

  struct Coord {
    Parameter* param;
    std::size_t index;
  };
  std::vector<Coord> pool;
  for (Parameter* p : params) {
    if (p->frozen) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i) pool.push_back({p, i});
  }
  if (pool.size() > samples) {
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(samples);
  }

  auto evaluate = [&loss] {
    Tape tape(false);
    return loss(tape).value()[0];
  };

  GradCheckResult result;
  for (const Coord& c : pool) {
    const double analytic = c.param->has_grad() ? c.param->grad[c.index] : 0.0;
    double& x = c.param->value[c.index];
    const double original = x;
    x = original + eps;
    const double plus = evaluate();
    x = original - eps;
    const double minus = evaluate();
    x = original;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double err = relative_error(analytic, numeric);
    ++result.coordinates_checked;
    if (err >= result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = c.param->name;
      result.worst_index = c.index;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return result;
}

}  // namespace t3l::nn
