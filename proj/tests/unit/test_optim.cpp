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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "t3l/error.hpp"
#include "t3l/nn/ops.hpp"
#include "t3l/nn/optim.hpp"
#include "test_helpers.hpp"

using namespace t3l;
using nn::AdamW;
using nn::AdamWConfig;
using nn::Parameter;
using nn::Tensor;

namespace {

Parameter scalar_param(const std::string& name, double value, double grad) {
  Parameter p;
  p.name = name;
  p.value = Tensor::row({value});
  p.grad = Tensor::row({grad});
  return p;
}

AdamWConfig plain(double lr, double wd) {
  AdamWConfig c;
  c.learning_rate = lr;
  c.weight_decay = wd;
  c.max_grad_norm = 0.0;
  return c;
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("adamw: two hand-computed steps on a scalar") {
    Parameter p = scalar_param("w", 0.5, 0.2);
    AdamW opt(plain(0.1, 0.01), {&p});
    opt.step();
    // Step 1: m = 0.1 g, v = 0.001 g^2, both bias corrections undo the betas.
    double w = 0.5 * (1.0 - 0.1 * 0.01);
    w -= 0.1 * 0.2 / (std::sqrt(0.04) + 1e-8);
    CHECK(p.value[0] == doctest::Approx(w).epsilon(1e-15));

    p.grad = Tensor::row({-0.4});
    opt.step();
    const double m = 0.9 * 0.02 + 0.1 * -0.4;
    const double v = 0.999 * (0.001 * 0.04) + 0.001 * 0.16;
    const double mhat = m / (1.0 - 0.9 * 0.9);
    const double vhat = v / (1.0 - 0.999 * 0.999);
    w = w * (1.0 - 0.1 * 0.01) - 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(p.value[0] == doctest::Approx(w).epsilon(1e-14));
    CHECK(opt.step_count() == 2);
  }

  TEST_CASE("adamw: zero gradient without weight decay leaves the value") {
    Parameter p = scalar_param("w", 1.25, 0.0);
    AdamW opt(plain(0.1, 0.0), {&p});
    opt.step();
    CHECK(p.value[0] == 1.25);
  }

  TEST_CASE("adamw: frozen parameters are untouched and have no moments") {
    Parameter a = scalar_param("a", 1.0, 5.0);
    Parameter b = scalar_param("b", 2.0, 5.0);
    a.frozen = true;
    AdamW opt(plain(0.1, 0.01), {&a, &b});
    CHECK(opt.state().moments.size() == 1);
    CHECK(opt.state().moments[0].name == "b");
    for (int i = 0; i < 5; ++i) {
      a.grad = Tensor::row({5.0});
      b.grad = Tensor::row({5.0});
      opt.step();
    }
    CHECK(a.value[0] == 1.0);
    CHECK(b.value[0] != 2.0);
  }

  TEST_CASE("adamw: missing gradient on a trainable parameter is an error") {
    Parameter a = scalar_param("a", 1.0, 0.0);
    a.grad = Tensor();
    AdamW opt(plain(0.1, 0.0), {&a});
    try {
      opt.step();
      FAIL("step accepted a missing gradient");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kState);
    }
  }

  TEST_CASE("adamw: linear warmup then constant") {
    AdamWConfig c = plain(1e-3, 0.0);
    c.warmup_steps = 4;
    Parameter p = scalar_param("w", 0.0, 0.0);
    AdamW opt(c, {&p});
    CHECK(opt.learning_rate_at(1) == doctest::Approx(0.25e-3));
    CHECK(opt.learning_rate_at(3) == doctest::Approx(0.75e-3));
    CHECK(opt.learning_rate_at(4) == 1e-3);
    CHECK(opt.learning_rate_at(100) == 1e-3);
  }

  TEST_CASE("adamw: accumulated gradients are averaged before the update") {
    AdamWConfig two = plain(0.05, 0.0);
    two.accumulation = 2;
    Parameter a = scalar_param("w", 1.0, 0.6);  // sum of two micro-batches of 0.3
    Parameter b = scalar_param("w", 1.0, 0.3);
    AdamW(two, {&a}).step();
    AdamW(plain(0.05, 0.0), {&b}).step();
    CHECK(a.value[0] == b.value[0]);
  }

  TEST_CASE("global norm clipping") {
    nn::Rng rng(1);
    for (int c = 0; c < 100; ++c) {
      Parameter p;
      p.name = "p";
      p.value = Tensor({3, 2});
      p.grad = t3l::testing::random_tensor({3, 2}, rng, 2.0);
      const Tensor before = p.grad;
      std::vector<Parameter*> ptrs{&p};
      const double norm = nn::clip_global_norm(ptrs, 1.0);
      double after = 0.0;
      for (double g : p.grad.values()) after += g * g;
      after = std::sqrt(after);
      REQUIRE(after <= norm + 1e-15);
      if (norm <= 1.0) {
        REQUIRE(p.grad == before);
      } else {
        REQUIRE(after == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("adamw: identical inputs give bit-identical parameters") {
    const auto run = [] {
      nn::Rng rng(9);
      Parameter p;
      p.name = "w";
      p.value = t3l::testing::random_tensor({4, 4}, rng);
      AdamWConfig c;
      c.warmup_steps = 3;
      AdamW opt(c, {&p});
      for (int s = 0; s < 20; ++s) {
        p.grad = t3l::testing::random_tensor({4, 4}, rng, 3.0);
        opt.step();
      }
      return p.value;
    };
    const Tensor a = run(), b = run();
    CHECK(t3l::testing::bitwise_equal(a.values(), b.values()));
  }

  TEST_CASE("reference presets") {
    const auto mt = nn::translator_reference_preset();
    CHECK(mt.learning_rate == 3e-5);
    CHECK(mt.warmup_steps == 500);
    CHECK(mt.accumulation == 2);
    CHECK(nn::classifier_reference_preset().learning_rate == 3e-6);
    const auto joint = nn::joint_reference_preset();
    CHECK(joint.learning_rate == 3e-6);
    CHECK(joint.warmup_steps == 0);
    CHECK(joint.batch_size == 1);
    CHECK(joint.accumulation == 1);
    CHECK(joint.weight_decay == 0.01);
    CHECK(joint.max_grad_norm == 1.0);
  }
}
