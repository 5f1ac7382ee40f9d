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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "t3l/models/tc_model.hpp"
#include "t3l/vocab/vocabulary.hpp"

namespace t3l::metrics {

// Exact-match fraction; sizes must agree and be non-zero.
double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> gold);

// |top-R(ranked) ∩ gold| / R with R = |gold|. Throws on an empty gold set.
double r_precision(std::span<const std::size_t> ranked, const models::LabelSet& gold);

struct MeanRPrecision {
  double value = 0.0;
  std::size_t included = 0;
  // Samples with an empty gold set; left out of the mean.
  std::size_t excluded_empty = 0;
};

MeanRPrecision mean_r_precision(const std::vector<std::vector<std::size_t>>& rankings,
                                const std::vector<models::LabelSet>& gold);

// BLEU-4, uniform weights, clipped n-gram counts, corpus-level geometric
// mean, brevity penalty exp(1 - r/c) when c < r. If any n >= 2 has zero
// matches, add-one smoothing is applied to the n >= 2 counts. A zero
// unigram match count gives 0. Tokens compare case-sensitively.
struct BleuScore {
  double bleu = 0.0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 1.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  bool smoothed = false;
};

inline constexpr const char* kBleuVariant =
    "BLEU-4 uniform weights, clipped counts, corpus-level, BP=exp(1-r/c) if c<r, "
    "add-one smoothing on n>=2 when any n>=2 match count is zero, case-sensitive whitespace tokens";

BleuScore corpus_bleu(const std::vector<vocab::Sentence>& candidates, const std::vector<vocab::Sentence>& references);

// Spearman rank correlation with average ranks for ties; 0 if either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

enum class MetricKind { kAccuracy, kMeanRPrecision };

std::string metric_name(MetricKind kind);

struct SampleRecord {
  std::size_t index = 0;
  models::LabelSet gold;
  std::size_t predicted = 0;
  std::vector<std::size_t> ranking;
  // 0/1 for accuracy, the R-Precision for mRP; unset (-1) if excluded.
  double score = 0.0;
  bool excluded = false;
};

struct EvalReport {
  MetricKind kind = MetricKind::kAccuracy;
  std::vector<SampleRecord> samples;
  double aggregate = 0.0;
  std::size_t count = 0;
  std::size_t excluded = 0;
  std::uint64_t seed = 0;
  double ms_per_sample = 0.0;

  // Aggregate recomputed from the per-sample records.
  double recompute() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Builds a report from predictions; each prediction supplies its label and ranking.
EvalReport evaluate_predictions(MetricKind kind, const std::vector<models::Prediction>& predictions,
                                const std::vector<models::LabelSet>& gold);

}  // namespace t3l::metrics
