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
#include <limits>
#include <vector>

#include "doctest.h"
#include "t3l/bridge/bridge.hpp"
#include "t3l/error.hpp"
#include "t3l/nn/gradcheck.hpp"
#include "t3l/nn/ops.hpp"
#include "test_helpers.hpp"

using namespace t3l;
using nn::Tensor;

namespace {

std::vector<double> random_simplex(nn::Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& x : p) total += (x = e(rng));
  for (double& x : p) x /= total;
  return p;
}

ErrorCategory category_of(const Tensor& p, const Tensor& table) {
  try {
    nn::Tape tape(false);
    bridge::expected_embeddings(tape.constant(p), tape.constant(table));
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::kState;
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("expected embedding matches a long-double weighted sum") {
    nn::Rng rng(1);
    for (int c = 0; c < 10000; ++c) {
      const std::size_t v = t3l::testing::random_dim(rng, 2, 40), d = t3l::testing::random_dim(rng, 1, 24);
      const Tensor table = t3l::testing::random_tensor({v, d}, rng);
      const auto p = random_simplex(rng, v);
      const Tensor e = bridge::expected_embedding(p, table);
      REQUIRE(e.cols() == d);
      for (std::size_t k = 0; k < d; ++k) {
        long double ref = 0.0L;
        for (std::size_t i = 0; i < v; ++i) ref += static_cast<long double>(p[i]) * table.at(i, k);
        REQUIRE(std::abs(static_cast<long double>(e[k]) - ref) <= 1e-12L);
      }
    }
  }

  TEST_CASE("one-hot distributions select the row exactly") {
    nn::Rng rng(2);
    for (int c = 0; c < 500; ++c) {
      const std::size_t v = t3l::testing::random_dim(rng, 2, 60), d = t3l::testing::random_dim(rng, 1, 64);
      const Tensor table = t3l::testing::random_tensor({v, d}, rng, 10.0);
      const std::size_t t = t3l::testing::random_dim(rng, 0, v - 1);
      std::vector<double> p(v, 0.0);
      p[t] = 1.0;
      const Tensor e = bridge::expected_embedding(p, table);
      REQUIRE(t3l::testing::bitwise_equal(e.values(), table.row_span(t)));
    }
  }

  TEST_CASE("rows off the simplex and width mismatches are rejected") {
    const Tensor table({4, 3}, 1.0);
    CHECK(category_of(Tensor::row({0.5, 0.5, 0.0, 0.0}), table) == ErrorCategory::kState);
    CHECK(category_of(Tensor::row({0.6, 0.6, -0.2, 0.0}), table) == ErrorCategory::kInvalidArgument);
    CHECK(category_of(Tensor::row({0.5, 0.4, 0.0, 0.0}), table) == ErrorCategory::kInvalidArgument);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(category_of(Tensor::row({nan, 1.0, 0.0, 0.0}), table) == ErrorCategory::kInvalidArgument);
    CHECK(category_of(Tensor::row({0.5, 0.5, 0.0}), table) == ErrorCategory::kShapeMismatch);
    // Within tolerance of the simplex is accepted.
    CHECK(category_of(Tensor::row({0.5 + 1e-12, 0.5, 0.0, 0.0}), table) == ErrorCategory::kState);
  }

  TEST_CASE("gradients flow to both the distribution and the table") {
    nn::Rng rng(3);
    for (int c = 0; c < 50; ++c) {
      const std::size_t m = t3l::testing::random_dim(rng, 1, 4), v = t3l::testing::random_dim(rng, 2, 8),
                        d = t3l::testing::random_dim(rng, 1, 5);
      nn::Parameter logits{"logits", t3l::testing::random_tensor({m, v}, rng), {}, false};
      nn::Parameter table{"table", t3l::testing::random_tensor({v, d}, rng), {}, false};
      const Tensor w = t3l::testing::random_tensor({m, d}, rng);
      std::vector<nn::Parameter*> ptrs{&logits, &table};
      const auto result = nn::finite_difference_check(
          [&](nn::Tape& t) {
            const nn::Var p = nn::softmax(t.parameter(logits), 1.0);
            const nn::Var e = bridge::expected_embeddings(p, t.parameter(table));
            return nn::sum(nn::mul(e, t.constant(w)));
          },
          ptrs, 1e-5, 40, rng);
      REQUIRE(result.max_relative_error < 1e-6);
    }
  }
}
