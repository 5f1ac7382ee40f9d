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

#include "t3l/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "t3l/error.hpp"

namespace t3l::metrics {

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> gold) {
  require(predicted.size() == gold.size(), ErrorCategory::kShapeMismatch,
          "accuracy: " + std::to_string(predicted.size()) + " predictions vs " + std::to_string(gold.size()) +
              " gold labels");
  require(!gold.empty(), ErrorCategory::kInvalidArgument, "accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double r_precision(std::span<const std::size_t> ranked, const models::LabelSet& gold) {
  require(!gold.empty(), ErrorCategory::kInvalidArgument, "r_precision: empty gold label set");
  const std::size_t r = gold.size();
  require(ranked.size() >= r, ErrorCategory::kInvalidArgument,
          "r_precision: ranking of " + std::to_string(ranked.size()) + " labels shorter than R=" + std::to_string(r));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < r; ++i) {
    hits += std::find(gold.begin(), gold.end(), ranked[i]) != gold.end();
  }
  return static_cast<double>(hits) / static_cast<double>(r);
}

MeanRPrecision mean_r_precision(const std::vector<std::vector<std::size_t>>& rankings,
                                const std::vector<models::LabelSet>& gold) {
  require(rankings.size() == gold.size(), ErrorCategory::kShapeMismatch, "mean_r_precision: size mismatch");
  MeanRPrecision out;
  double total = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].empty()) {
      ++out.excluded_empty;
      continue;
    }
    total += r_precision(rankings[i], gold[i]);
    ++out.included;
  }
  require(out.included > 0, ErrorCategory::kInvalidArgument, "mean_r_precision: no samples with gold labels");
  out.value = total / static_cast<double>(out.included);
  return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const vocab::Sentence& s, std::size_t n) {
  NgramCounts counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    counts[std::vector<std::string>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                    s.begin() + static_cast<std::ptrdiff_t>(i + n))] += 1;
  }
  return counts;
}

}  // namespace

BleuScore corpus_bleu(const std::vector<vocab::Sentence>& candidates, const std::vector<vocab::Sentence>& references) {
  require(candidates.size() == references.size(), ErrorCategory::kShapeMismatch,
          "corpus_bleu: " + std::to_string(candidates.size()) + " candidates vs " +
              std::to_string(references.size()) + " references");
  require(!candidates.empty(), ErrorCategory::kInvalidArgument, "corpus_bleu: empty corpus");
  std::array<std::size_t, 4> matches{}, totals{};
  BleuScore out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.candidate_length += candidates[i].size();
    out.reference_length += references[i].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const NgramCounts cand = ngrams(candidates[i], n);
      const NgramCounts ref = ngrams(references[i], n);
      for (const auto& [gram, count] : cand) {
        totals[n - 1] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (matches[0] == 0 || out.candidate_length == 0) return out;
  for (std::size_t n = 1; n < 4; ++n) out.smoothed = out.smoothed || matches[n] == 0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double num = static_cast<double>(matches[n]);
    double den = static_cast<double>(totals[n]);
    if (n >= 1 && out.smoothed) {
      num += 1.0;
      den += 1.0;
    }
    out.precisions[n] = num / den;
    log_sum += 0.25 * std::log(out.precisions[n]);
  }
  const double c = static_cast<double>(out.candidate_length);
  const double r = static_cast<double>(out.reference_length);
  out.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
  out.bleu = out.brevity_penalty * std::exp(log_sum);
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCategory::kShapeMismatch, "spearman: size mismatch");
  require(x.size() >= 2, ErrorCategory::kInvalidArgument, "spearman: need at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string metric_name(MetricKind kind) { return kind == MetricKind::kAccuracy ? "accuracy" : "mrp"; }

double EvalReport::recompute() const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.excluded) continue;
    total += s.score;
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

nlohmann::json EvalReport::to_json() const {
  return {{"metric", metric_name(kind)}, {"aggregate", aggregate}, {"count", count},
          {"excluded", excluded},        {"seed", seed},           {"ms_per_sample", ms_per_sample}};
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "index,gold,predicted,ranking,score,excluded\n";
  for (const auto& s : samples) {
    std::string gold, ranking;
    for (std::size_t i = 0; i < s.gold.size(); ++i) gold += (i ? ";" : "") + std::to_string(s.gold[i]);
    for (std::size_t i = 0; i < s.ranking.size(); ++i) ranking += (i ? ";" : "") + std::to_string(s.ranking[i]);
    out << s.index << ',' << gold << ',' << s.predicted << ',' << ranking << ',' << s.score << ','
        << (s.excluded ? 1 : 0) << '\n';
  }
  return out.str();
}

EvalReport evaluate_predictions(MetricKind kind, const std::vector<models::Prediction>& predictions,
                                const std::vector<models::LabelSet>& gold) {
  require(predictions.size() == gold.size(), ErrorCategory::kShapeMismatch,
          "evaluate: " + std::to_string(predictions.size()) + " predictions vs " + std::to_string(gold.size()) +
              " gold entries");
  require(!gold.empty(), ErrorCategory::kInvalidArgument, "evaluate: no samples");
  EvalReport report;
  report.kind = kind;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    SampleRecord rec;
    rec.index = i;
    rec.gold = gold[i];
    rec.predicted = predictions[i].label;
    rec.ranking = predictions[i].ranking;
    if (kind == MetricKind::kAccuracy) {
      require(gold[i].size() == 1, ErrorCategory::kInvalidArgument, "evaluate: accuracy needs one gold label per sample");
      rec.score = rec.predicted == gold[i][0] ? 1.0 : 0.0;
    } else if (gold[i].empty()) {
      rec.excluded = true;
      rec.score = -1.0;
      ++report.excluded;
    } else {
      rec.score = r_precision(rec.ranking, gold[i]);
    }
    report.samples.push_back(std::move(rec));
  }
  report.count = report.samples.size() - report.excluded;
  require(report.count > 0, ErrorCategory::kInvalidArgument, "evaluate: every sample was excluded");
  report.aggregate = report.recompute();
  return report;
}

}  // namespace t3l::metrics
