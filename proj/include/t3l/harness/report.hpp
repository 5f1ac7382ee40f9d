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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace t3l::harness {

struct RunCell {
  std::string method;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double metric = 0.0;
  double ms_per_sample = 0.0;
  std::size_t samples = 0;
};

struct RunAverage {
  std::string method;
  std::size_t budget = 0;
  double mean = 0.0;
  std::size_t seeds = 0;
};

// Soft minus hard T3L metric for one budget; seed 0 holds the seed mean.
struct SoftHardDelta {
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double soft = 0.0;
  double hard = 0.0;
  double delta = 0.0;
};

struct RunReport {
  std::string metric = "accuracy";
  nlohmann::json config;
  std::vector<RunCell> cells;
  // Test BLEU of each seed's forward translator.
  std::map<std::uint64_t, double> translator_bleu;

  std::vector<RunAverage> averages() const;
  std::vector<SoftHardDelta> soft_hard_deltas() const;
  std::optional<double> mean(const std::string& method, std::size_t budget) const;
  const RunCell* find(const std::string& method, std::size_t budget, std::uint64_t seed) const;

  nlohmann::json to_json() const;
  // One row per cell; values printed with round-trip precision.
  std::string to_csv() const;
  static RunReport from_csv(const std::string& text);

  void write(const std::filesystem::path& dir) const;
};

struct SweepPoint {
  std::string checkpoint;
  std::size_t optimizer_steps = 0;
  double bleu = 0.0;
  // Downstream metric per few-shot budget.
  std::map<std::size_t, double> metric;
};

struct SweepReport {
  std::uint64_t seed = 0;
  double severity = 0.0;
  std::string metric = "accuracy";
  std::vector<SweepPoint> points;

  // Spearman correlation of BLEU against the metric at `budget`.
  double rank_correlation(std::size_t budget) const;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  void write(const std::filesystem::path& dir) const;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace t3l::harness
