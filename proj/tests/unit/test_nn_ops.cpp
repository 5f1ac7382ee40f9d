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
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "t3l/error.hpp"
#include "t3l/nn/gradcheck.hpp"
#include "t3l/nn/ops.hpp"
#include "test_helpers.hpp"

using namespace t3l;
using nn::Parameter;
using nn::Tape;
using nn::Tensor;
using nn::Var;
using t3l::testing::random_dim;
using t3l::testing::random_tensor;

namespace {

using Op = std::function<Var(Tape&, std::vector<Var>&)>;

// Projects the op's output onto fixed random weights so every output
// element contributes, then compares backprop with central differences.
double check_op(std::vector<Parameter> inputs, const Op& op, nn::Rng& rng, std::size_t samples = 8) {
  Tensor weights;
  {
    Tape probe(false);
    std::vector<Var> vars;
    for (auto& p : inputs) vars.push_back(probe.parameter(p));
    weights = random_tensor(op(probe, vars).value().shape(), rng);
  }
  const nn::LossBuilder loss = [&](Tape& t) {
    std::vector<Var> vars;
    for (auto& p : inputs) vars.push_back(t.parameter(p));
    const Var out = op(t, vars);
    return nn::sum(nn::mul(out, t.constant(weights)));
  };
  std::vector<Parameter*> ptrs;
  for (auto& p : inputs) ptrs.push_back(&p);
  return nn::finite_difference_check(loss, ptrs, 1e-5, samples, rng).max_relative_error;
}

Parameter param(const std::string& name, Tensor value) {
  Parameter p;
  p.name = name;
  p.value = std::move(value);
  return p;
}

constexpr int kCases = 100;
constexpr double kTolerance = 1e-3;

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("gradient check: matmul, matmul_nt") {
    nn::Rng rng(1);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t m = random_dim(rng, 1, 5), k = random_dim(rng, 1, 5), n = random_dim(rng, 1, 5);
      worst = std::max(worst, check_op({param("a", random_tensor({m, k}, rng)), param("b", random_tensor({k, n}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::matmul(v[0], v[1]); }, rng));
      worst = std::max(worst, check_op({param("a", random_tensor({m, k}, rng)), param("b", random_tensor({n, k}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::matmul_nt(v[0], v[1]); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: add, mul, scale") {
    nn::Rng rng(2);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 5), k = random_dim(rng, 1, 6);
      const double f = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
      worst = std::max(worst, check_op({param("a", random_tensor({r, k}, rng)), param("b", random_tensor({r, k}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::add(v[0], v[1]); }, rng));
      worst = std::max(worst, check_op({param("a", random_tensor({r, k}, rng)), param("b", random_tensor({r, k}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::mul(v[0], v[1]); }, rng));
      worst = std::max(worst, check_op({param("a", random_tensor({r, k}, rng))},
                                       [f](Tape&, std::vector<Var>& v) { return nn::scale(v[0], f); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: linear") {
    nn::Rng rng(3);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 5), in = random_dim(rng, 1, 6), out = random_dim(rng, 1, 6);
      worst = std::max(worst, check_op({param("x", random_tensor({r, in}, rng)), param("w", random_tensor({in, out}, rng)),
                                        param("b", random_tensor({1, out}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::linear(v[0], v[1], v[2]); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: gather_rows with repeated ids") {
    nn::Rng rng(4);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t v = random_dim(rng, 1, 6), d = random_dim(rng, 1, 5), n = random_dim(rng, 1, 7);
      std::vector<std::size_t> ids(n);
      for (auto& id : ids) id = random_dim(rng, 0, v - 1);
      worst = std::max(worst, check_op({param("table", random_tensor({v, d}, rng))},
                                       [ids](Tape&, std::vector<Var>& x) { return nn::gather_rows(x[0], ids); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: softmax with temperature, plain and causal") {
    nn::Rng rng(5);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 5), k = random_dim(rng, 1, 6);
      const double temp = std::uniform_real_distribution<double>(0.3, 2.5)(rng);
      worst = std::max(worst, check_op({param("x", random_tensor({r, k}, rng, 2.0))},
                                       [temp](Tape&, std::vector<Var>& v) { return nn::softmax(v[0], temp); }, rng));
      const std::size_t s = random_dim(rng, 1, 5);
      worst = std::max(worst, check_op({param("x", random_tensor({s, s}, rng, 2.0))},
                                       [temp](Tape&, std::vector<Var>& v) { return nn::softmax(v[0], temp, true); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: layer_norm") {
    nn::Rng rng(6);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 4), k = random_dim(rng, 2, 7);
      worst = std::max(worst, check_op({param("x", random_tensor({r, k}, rng, 2.0)), param("g", random_tensor({1, k}, rng)),
                                        param("b", random_tensor({1, k}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::layer_norm(v[0], v[1], v[2]); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: relu and gelu") {
    nn::Rng rng(7);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 4), k = random_dim(rng, 1, 7);
      worst = std::max(worst, check_op({param("x", random_tensor({r, k}, rng, 3.0))},
                                       [](Tape&, std::vector<Var>& v) { return nn::relu(v[0]); }, rng));
      worst = std::max(worst, check_op({param("x", random_tensor({r, k}, rng, 3.0))},
                                       [](Tape&, std::vector<Var>& v) { return nn::gelu(v[0]); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: masked mean_pool") {
    nn::Rng rng(8);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 6), k = random_dim(rng, 1, 5);
      std::vector<double> mask(r);
      for (auto& m : mask) m = random_dim(rng, 0, 1);
      mask[random_dim(rng, 0, r - 1)] = 1.0;
      worst = std::max(worst, check_op({param("x", random_tensor({r, k}, rng))},
                                       [mask](Tape&, std::vector<Var>& v) { return nn::mean_pool(v[0], mask); }, rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: concat_rows, concat_cols, slice_cols") {
    nn::Rng rng(9);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r1 = random_dim(rng, 1, 4), r2 = random_dim(rng, 1, 4), k = random_dim(rng, 1, 5);
      worst = std::max(worst, check_op({param("a", random_tensor({r1, k}, rng)), param("b", random_tensor({r2, k}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::concat_rows(v); }, rng));
      const std::size_t k2 = random_dim(rng, 1, 5);
      worst = std::max(worst, check_op({param("a", random_tensor({r1, k}, rng)), param("b", random_tensor({r1, k2}, rng))},
                                       [](Tape&, std::vector<Var>& v) { return nn::concat_cols(v); }, rng));
      const std::size_t begin = random_dim(rng, 0, k + k2 - 1);
      const std::size_t count = random_dim(rng, 1, k + k2 - begin);
      worst = std::max(worst, check_op({param("x", random_tensor({r1, k + k2}, rng))},
                                       [begin, count](Tape&, std::vector<Var>& v) {
                                         return nn::slice_cols(v[0], begin, count);
                                       },
                                       rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: dropout with a fixed mask stream") {
    nn::Rng rng(10);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 4), k = random_dim(rng, 1, 6);
      const std::uint64_t mask_seed = rng();
      worst = std::max(worst, check_op({param("x", random_tensor({r, k}, rng))},
                                       [mask_seed](Tape&, std::vector<Var>& v) {
                                         nn::Rng mask_rng(mask_seed);
                                         return nn::dropout(v[0], 0.3, mask_rng);
                                       },
                                       rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("gradient check: cross_entropy and binary_cross_entropy") {
    nn::Rng rng(11);
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const std::size_t r = random_dim(rng, 1, 4), k = random_dim(rng, 2, 6);
      std::vector<std::size_t> targets(r);
      for (auto& t : targets) t = random_dim(rng, 0, k - 1);
      worst = std::max(worst, check_op({param("z", random_tensor({r, k}, rng, 3.0))},
                                       [targets](Tape&, std::vector<Var>& v) { return nn::cross_entropy(v[0], targets); },
                                       rng));
      std::vector<double> bits(k);
      for (auto& b : bits) b = static_cast<double>(random_dim(rng, 0, 1));
      worst = std::max(worst, check_op({param("z", random_tensor({1, k}, rng, 3.0))},
                                       [bits](Tape&, std::vector<Var>& v) { return nn::binary_cross_entropy(v[0], bits); },
                                       rng));
    }
    CHECK(worst < kTolerance);
  }

  TEST_CASE("softmax of equal logits is uniform") {
    const Tensor p = nn::softmax_values(Tensor::row({0.0, 0.0, 0.0}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("softmax rows are on the simplex and shift invariant") {
    nn::Rng rng(12);
    for (int c = 0; c < 200; ++c) {
      const std::size_t r = random_dim(rng, 1, 5), k = random_dim(rng, 1, 30);
      const Tensor x = random_tensor({r, k}, rng, 20.0);
      const double shift = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
      Tensor shifted = x;
      for (auto& v : shifted.values()) v += shift;
      const double temp = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
      const Tensor p = nn::softmax_values(x, temp), q = nn::softmax_values(shifted, temp);
      for (std::size_t i = 0; i < r; ++i) {
        double total = 0.0;
        for (double v : p.row_span(i)) {
          REQUIRE(v >= 0.0);
          total += v;
        }
        REQUIRE(std::abs(total - 1.0) <= 1e-12);
      }
      REQUIRE(t3l::testing::max_abs_diff(p, q) <= 1e-12);
    }
  }

  TEST_CASE("causal softmax gives exact zeros above the diagonal") {
    nn::Rng rng(13);
    Tape tape(false);
    const Var p = nn::softmax(tape.constant(random_tensor({4, 4}, rng)), 1.0, true);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) CHECK(p.value().at(i, j) == 0.0);
    }
    CHECK(p.value().at(0, 0) == 1.0);
  }

  TEST_CASE("matmul by the identity is exact") {
    nn::Rng rng(14);
    Tape tape(false);
    Tensor eye = Tensor::matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    const Tensor a = random_tensor({3, 5}, rng);
    CHECK(nn::matmul(tape.constant(eye), tape.constant(a)).value() == a);
  }

  TEST_CASE("shape mismatch names both shapes") {
    Tape tape(false);
    const Var a = tape.constant(Tensor::matrix(2, 3));
    const Var b = tape.constant(Tensor::matrix(2, 3));
    try {
      nn::matmul(a, b);
      FAIL("matmul accepted mismatched shapes");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kShapeMismatch);
      CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
    }
    CHECK_THROWS_AS(nn::add(a, tape.constant(Tensor::matrix(3, 2))), Error);
  }

  TEST_CASE("cross_entropy closed forms") {
    Tape tape;
    const Var z = tape.variable(Tensor::row({0.0, 0.0}));
    const std::vector<std::size_t> target{0};
    const Var loss = nn::cross_entropy(z, target);
    CHECK(loss.value()[0] == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
    tape.backward(loss);
    CHECK(tape.grad(z)[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(tape.grad(z)[1] == doctest::Approx(0.5).epsilon(1e-15));

    double previous = 1.0;
    for (double margin : {1.0, 5.0, 20.0, 60.0}) {
      Tape t(false);
      const double v = nn::cross_entropy(t.constant(Tensor::row({margin, 0.0, 0.0})), target).value()[0];
      CHECK(v < previous);
      previous = v;
    }
    CHECK(previous < 1e-20);

    Tape t(false);
    const std::vector<std::size_t> bad{2};
    CHECK_THROWS_AS(nn::cross_entropy(t.constant(Tensor::row({0.0, 0.0})), bad), Error);
  }

  TEST_CASE("binary_cross_entropy closed forms") {
    Tape tape(false);
    const std::vector<double> one{1.0}, zero{0.0};
    CHECK(nn::binary_cross_entropy(tape.constant(Tensor::row({0.0})), one).value()[0] ==
          doctest::Approx(std::numbers::ln2).epsilon(1e-15));
    CHECK(nn::binary_cross_entropy(tape.constant(Tensor::row({30.0})), one).value()[0] < 1e-12);
    nn::Rng rng(15);
    for (int c = 0; c < 100; ++c) {
      const double z = std::uniform_real_distribution<double>(-40.0, 40.0)(rng);
      const double a = nn::binary_cross_entropy(tape.constant(Tensor::row({z})), one).value()[0];
      const double b = nn::binary_cross_entropy(tape.constant(Tensor::row({-z})), zero).value()[0];
      REQUIRE(std::abs(a - b) <= 1e-12);
    }
    const std::vector<double> half{0.5};
    CHECK_THROWS_AS(nn::binary_cross_entropy(tape.constant(Tensor::row({0.0})), half), Error);
  }

  TEST_CASE("every gradient reached by backward is finite") {
    nn::Rng rng(16);
    Tape tape;
    const Var x = tape.variable(random_tensor({3, 4}, rng, 5.0));
    const Var w = tape.variable(random_tensor({4, 4}, rng));
    const Var h = nn::gelu(nn::matmul(x, w));
    const Var p = nn::softmax(h, 0.5);
    const std::vector<std::size_t> targets{0, 1, 3};
    tape.backward(nn::cross_entropy(nn::add(p, h), targets));
    CHECK(nn::all_finite(tape.grad(x)));
    CHECK(nn::all_finite(tape.grad(w)));
  }

  TEST_CASE("finite difference check of a quadratic") {
    Parameter w = param("w", Tensor::row({3.0}));
    std::vector<Parameter*> ptrs{&w};
    nn::Rng rng(17);
    const auto result = nn::finite_difference_check(
        [&](Tape& t) {
          const Var v = t.parameter(w);
          return nn::sum(nn::mul(v, v));
        },
        ptrs, 1e-5, 1, rng);
    CHECK(result.coordinates_checked == 1);
    CHECK(std::abs(result.worst_numeric - 6.0) < 1e-6);
    CHECK(std::abs(result.worst_analytic - 6.0) < 1e-12);
  }

  TEST_CASE("finite difference check skips frozen coordinates") {
    Parameter a = param("a", Tensor::row({1.0, 2.0}));
    Parameter b = param("b", Tensor::row({3.0, -1.5}));
    a.frozen = true;
    std::vector<Parameter*> ptrs{&a, &b};
    nn::Rng rng(18);
    const auto result = nn::finite_difference_check(
        [&](Tape& t) { return nn::sum(nn::mul(t.parameter(a), t.parameter(b))); }, ptrs, 1e-5, 50, rng);
    CHECK(result.coordinates_checked >= 1);
    CHECK(result.worst_parameter == "b");
  }
}
