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

#include "t3l/bridge/bridge.hpp"

#include <cmath>
#include <string>

#include "t3l/error.hpp"
#include "t3l/nn/ops.hpp"

namespace t3l::bridge {

void check_simplex(const nn::Tensor& probabilities, double tolerance) {
  for (std::size_t r = 0; r < probabilities.rows(); ++r) {
    double total = 0.0;
    for (double v : probabilities.row_span(r)) {
      require(v >= -tolerance && std::isfinite(v), ErrorCategory::kInvalidArgument,
              "bridge: row " + std::to_string(r) + " has entry " + std::to_string(v) + " off the simplex");
      total += v;
    }
    require(std::abs(total - 1.0) <= tolerance, ErrorCategory::kInvalidArgument,
            "bridge: row " + std::to_string(r) + " sums to " + std::to_string(total));
  }
}

nn::Tensor expected_embedding(std::span<const double> p, const nn::Tensor& table) {
  nn::Tape tape(false);
  const nn::Var probs = tape.constant(nn::Tensor::row(std::vector<double>(p.begin(), p.end())));
  return expected_embeddings(probs, tape.constant(table)).value();
}

nn::Var expected_embeddings(nn::Var probabilities, nn::Var table) {
  const nn::Tensor& p = probabilities.value();
  const nn::Tensor& e = table.value();
  if (p.cols() != e.rows()) {
    fail(ErrorCategory::kShapeMismatch, "bridge: distributions " + nn::shape_string(p.shape()) +
                                            " do not match embedding table " + nn::shape_string(e.shape()));
  }
  check_simplex(p);
  return nn::matmul(probabilities, table);
}

ExpectedEmbeddingSequence bridge_sequence(nn::Tape& tape, const models::SoftTranslation& translation,
                                          models::TcModel& classifier) {
  ExpectedEmbeddingSequence out;
  out.embeddings = expected_embeddings(translation.probabilities, classifier.embedding_table(tape));
  out.length = translation.length();
  return out;
}

}  // namespace t3l::bridge
