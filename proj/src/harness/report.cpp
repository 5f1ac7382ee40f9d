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

#include "t3l/harness/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "t3l/error.hpp"
#include "t3l/metrics/metrics.hpp"

namespace t3l::harness {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCategory::kFormat,
          "report: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<RunAverage> RunReport::averages() const {
  std::vector<RunAverage> out;
  for (const auto& c : cells) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const RunAverage& a) { return a.method == c.method && a.budget == c.budget; });
    if (it == out.end()) {
      out.push_back({c.method, c.budget, 0.0, 0});
      it = out.end() - 1;
    }
    it->mean += c.metric;
    ++it->seeds;
  }
  for (auto& a : out) a.mean /= static_cast<double>(a.seeds);
  return out;
}

std::optional<double> RunReport::mean(const std::string& method, std::size_t budget) const {
  for (const auto& a : averages()) {
    if (a.method == method && a.budget == budget) return a.mean;
  }
  return std::nullopt;
}

const RunCell* RunReport::find(const std::string& method, std::size_t budget, std::uint64_t seed) const {
  for (const auto& c : cells) {
    if (c.method == method && c.budget == budget && c.seed == seed) return &c;
  }
  return nullptr;
}

std::vector<SoftHardDelta> RunReport::soft_hard_deltas() const {
  std::vector<SoftHardDelta> out;
  std::set<std::size_t> budgets;
  for (const auto& c : cells) budgets.insert(c.budget);
  for (std::size_t b : budgets) {
    SoftHardDelta mean{b, 0, 0.0, 0.0, 0.0};
    std::size_t n = 0;
    for (const auto& c : cells) {
      if (c.method != "t3l_soft" || c.budget != b) continue;
      const RunCell* hard = find("t3l_hard", b, c.seed);
      if (hard == nullptr) continue;
      out.push_back({b, c.seed, c.metric, hard->metric, c.metric - hard->metric});
      mean.soft += c.metric;
      mean.hard += hard->metric;
      ++n;
    }
    if (n == 0) continue;
    mean.soft /= static_cast<double>(n);
    mean.hard /= static_cast<double>(n);
    mean.delta = mean.soft - mean.hard;
    out.push_back(mean);
  }
  return out;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["format"] = "t3l-run-report";
  j["metric"] = metric;
  j["bleu_variant"] = metrics::kBleuVariant;
  j["config"] = config;
  for (const auto& c : cells) {
    j["cells"].push_back({{"method", c.method},
                          {"budget", c.budget},
                          {"seed", c.seed},
                          {"metric", c.metric},
                          {"ms_per_sample", c.ms_per_sample},
                          {"samples", c.samples}});
  }
  for (const auto& a : averages()) {
    j["averages"].push_back({{"method", a.method}, {"budget", a.budget}, {"mean", a.mean}, {"seeds", a.seeds}});
  }
  j["soft_vs_hard"] = nlohmann::json::array();
  for (const auto& d : soft_hard_deltas()) {
    j["soft_vs_hard"].push_back({{"budget", d.budget},
                                 {"seed", d.seed == 0 ? nlohmann::json("mean") : nlohmann::json(d.seed)},
                                 {"soft", d.soft},
                                 {"hard", d.hard},
                                 {"delta", d.delta}});
  }
  j["translator_bleu"] = nlohmann::json::object();
  for (const auto& [seed, bleu] : translator_bleu) j["translator_bleu"][std::to_string(seed)] = bleu;
  return j;
}

std::string RunReport::to_csv() const {
  std::ostringstream out;
  out << "method,budget,seed,metric_kind,metric,ms_per_sample,samples\n";
  for (const auto& c : cells) {
    out << c.method << ',' << c.budget << ',' << c.seed << ',' << metric << ',' << format_double(c.metric) << ','
        << format_double(c.ms_per_sample) << ',' << c.samples << '\n';
  }
  return out.str();
}

RunReport RunReport::from_csv(const std::string& text) {
  RunReport r;
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("method,budget,seed", 0) == 0,
          ErrorCategory::kFormat, "report: missing run.csv header");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    require(f.size() == 7, ErrorCategory::kFormat, "report: run.csv row " + std::to_string(row) + " has " +
                                                       std::to_string(f.size()) + " fields, expected 7");
    RunCell c;
    c.method = f[0];
    c.budget = static_cast<std::size_t>(std::stoull(f[1]));
    c.seed = std::stoull(f[2]);
    r.metric = f[3];
    c.metric = parse_double(f[4]);
    c.ms_per_sample = parse_double(f[5]);
    c.samples = static_cast<std::size_t>(std::stoull(f[6]));
    r.cells.push_back(c);
  }
  return r;
}

void RunReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / "run.json", to_json().dump(2) + "\n");
  write_file(dir / "run.csv", to_csv());
  std::ostringstream avg;
  avg << "method,budget,seeds,mean\n";
  for (const auto& a : averages()) avg << a.method << ',' << a.budget << ',' << a.seeds << ',' << format_double(a.mean) << '\n';
  write_file(dir / "averages.csv", avg.str());
}

double SweepReport::rank_correlation(std::size_t budget) const {
  std::vector<double> bleu, metric;
  for (const auto& p : points) {
    auto it = p.metric.find(budget);
    require(it != p.metric.end(), ErrorCategory::kInvalidArgument,
            "sweep: no metric for budget " + std::to_string(budget));
    bleu.push_back(p.bleu);
    metric.push_back(it->second);
  }
  return metrics::spearman(bleu, metric);
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j;
  j["format"] = "t3l-sweep-report";
  j["seed"] = seed;
  j["severity"] = severity;
  j["metric"] = metric;
  j["bleu_variant"] = metrics::kBleuVariant;
  std::set<std::size_t> budgets;
  for (const auto& p : points) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : p.metric) {
      m[std::to_string(k)] = v;
      budgets.insert(k);
    }
    j["points"].push_back(
        {{"checkpoint", p.checkpoint}, {"optimizer_steps", p.optimizer_steps}, {"bleu", p.bleu}, {"metric", m}});
  }
  j["rank_correlation"] = nlohmann::json::object();
  for (std::size_t b : budgets) j["rank_correlation"][std::to_string(b)] = rank_correlation(b);
  return j;
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "checkpoint,optimizer_steps,bleu,budget,metric\n";
  for (const auto& p : points) {
    for (const auto& [k, v] : p.metric) {
      out << p.checkpoint << ',' << p.optimizer_steps << ',' << format_double(p.bleu) << ',' << k << ','
          << format_double(v) << '\n';
    }
  }
  return out.str();
}

void SweepReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / ("sweep-seed-" + std::to_string(seed) + ".json"), to_json().dump(2) + "\n");
  write_file(dir / ("sweep-seed-" + std::to_string(seed) + ".csv"), to_csv());
}

}  // namespace t3l::harness
