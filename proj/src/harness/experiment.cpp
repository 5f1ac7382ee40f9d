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

#include "t3l/harness/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <regex>
#include <sstream>

#include "t3l/error.hpp"
#include "t3l/nn/checkpoint.hpp"
#include "t3l/synth/synthlang.hpp"

namespace t3l::harness {

namespace fs = std::filesystem;

const data::LabeledCorpus& LanguageData::fewshot(std::size_t k) const {
  if (k == synth::kFewShotSmall) return fewshot_small;
  if (k == synth::kFewShotLarge) return fewshot_large;
  fail(ErrorCategory::kInvalidArgument, "no few-shot pool of size " + std::to_string(k));
}

std::string role_directory(TranslatorRole role) {
  switch (role) {
    case TranslatorRole::kForward: return "mt";
    case TranslatorRole::kReverse: return "mt-reverse";
    case TranslatorRole::kSweep: return "sweep-mt";
  }
  return "mt";
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return vocab::fnv1a(bytes);
}

std::vector<fs::path> list_checkpoints(const fs::path& dir) {
  static const std::regex pattern(R"((epoch|step)-(\d+)\.ckpt)");
  std::map<std::size_t, fs::path> by_step;
  if (!fs::is_directory(dir)) return {};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::smatch m;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    std::size_t steps = std::stoull(m[2].str());
    const bool epoch = m[1].str() == "epoch";
    if (epoch) {
      const auto history = nn::load_checkpoint(path).metadata.at("result").at("history");
      steps = history.empty() ? 0 : history.back().at("optimizer_steps").get<std::size_t>();
    }
    // An epoch end wins over a step snapshot taken at the same step.
    if (epoch || by_step.count(steps) == 0) by_step[steps] = path;
  }
  std::vector<fs::path> out;
  for (auto& [steps, path] : by_step) out.push_back(path);
  return out;
}

Runner::Runner(ExperimentConfig config, Log log) : config_(std::move(config)), log_(std::move(log)) {}

fs::path Runner::data_dir() const { return config_.output_dir / "data"; }
fs::path Runner::seed_dir(std::uint64_t seed) const { return config_.output_dir / ("seed-" + std::to_string(seed)); }
fs::path Runner::report_dir() const { return config_.output_dir / "reports"; }

void Runner::log(const std::string& line) const {
  if (log_) log_(line);
}

training::TrainOptions Runner::seeded(training::TrainOptions options, std::uint64_t seed) const {
  options.seed = seed;
  options.log = log_;
  return options;
}

namespace {

void write_language(const fs::path& dir, const data::ParallelCorpus& train, const data::ParallelCorpus& dev,
                    const data::ParallelCorpus& test, const synth::DatasetBundle& bundle) {
  fs::create_directories(dir);
  data::write_parallel(dir / "parallel.train.tsv", train);
  data::write_parallel(dir / "parallel.dev.tsv", dev);
  data::write_parallel(dir / "parallel.test.tsv", test);
  data::write_labeled(dir / "test.tsv", bundle.tgt_test);
  data::write_labeled(dir / "fewshot-10.tsv", bundle.fewshot_small);
  data::write_labeled(dir / "fewshot-100.tsv", bundle.fewshot_large);
  data::write_labeled(dir / "selection.tsv", bundle.selection_dev);
}

LanguageData read_language(const fs::path& dir) {
  LanguageData d;
  d.parallel_train = data::read_parallel(dir / "parallel.train.tsv");
  d.parallel_dev = data::read_parallel(dir / "parallel.dev.tsv");
  d.parallel_test = data::read_parallel(dir / "parallel.test.tsv");
  d.test = data::read_labeled(dir / "test.tsv");
  d.fewshot_small = data::read_labeled(dir / "fewshot-10.tsv");
  d.fewshot_large = data::read_labeled(dir / "fewshot-100.tsv");
  d.selection = data::read_labeled(dir / "selection.tsv");
  return d;
}

}  // namespace

nlohmann::json Runner::gen_data(bool force) {
  const fs::path dir = data_dir();
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    require(force, ErrorCategory::kState, dir.string() + " already exists (use --force to overwrite)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
  const synth::LanguageSpec lang = config_.effective_language();
  const synth::LanguageSpec sweep_lang = config_.sweep_language();
  const vocab::Vocabulary v = synth::shared_vocabulary(synth::LanguagePair(lang));
  require(v == synth::shared_vocabulary(synth::LanguagePair(sweep_lang)), ErrorCategory::kConfig,
          "gen-data: sweep language must share the main vocabulary");
  v.save(dir / "vocab.txt");

  const synth::DatasetBundle bundle = synth::gen_classification_dataset(config_.task, lang, config_.data_seed);
  data::write_labeled(dir / "hr.train.tsv", bundle.hr_train);
  data::write_labeled(dir / "hr.dev.tsv", bundle.hr_dev);
  data::write_labeled(dir / "hr.test.tsv", bundle.hr_test);
  const auto par = synth::gen_language_pair(lang, config_.parallel_sizes, config_.data_seed);
  write_language(dir / "main", par.train, par.dev, par.test, bundle);
  const synth::DatasetBundle sweep_bundle =
      synth::gen_classification_dataset(config_.task, sweep_lang, config_.data_seed);
  const auto sweep_par = synth::gen_language_pair(sweep_lang, config_.parallel_sizes, config_.data_seed);
  write_language(dir / "sweep", sweep_par.train, sweep_par.dev, sweep_par.test, sweep_bundle);

  nlohmann::json manifest = {{"format", "t3l-manifest"},
                             {"version", 1},
                             {"config", to_json(config_)},
                             {"data_seed", config_.data_seed},
                             {"language", synth::to_json(lang)},
                             {"sweep_language", synth::to_json(sweep_lang)},
                             {"task", synth::to_json(config_.task)},
                             {"vocab_hash", v.content_hash()}};
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) manifest["files"][fs::relative(f, dir).generic_string()] = file_hash(f);
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  data_.reset();
  log("gen-data: wrote " + std::to_string(files.size()) + " files to " + dir.string());
  return manifest;
}

const ExperimentData& Runner::data() {
  if (data_) return *data_;
  const fs::path dir = data_dir();
  require(fs::exists(dir / "manifest.json"), ErrorCategory::kMissingComponent,
          "dataset not found at " + dir.string() + " (run gen-data)");
  ExperimentData d;
  d.vocabulary = vocab::Vocabulary::load(dir / "vocab.txt");
  d.hr_train = data::read_labeled(dir / "hr.train.tsv");
  d.hr_dev = data::read_labeled(dir / "hr.dev.tsv");
  d.hr_test = data::read_labeled(dir / "hr.test.tsv");
  d.main = read_language(dir / "main");
  d.sweep = read_language(dir / "sweep");
  data_ = std::move(d);
  return *data_;
}

namespace {

// Step snapshots carry no optimizer state, so resuming starts from an epoch checkpoint.
fs::path latest_epoch_checkpoint(const fs::path& dir) {
  static const std::regex epoch_pattern(R"(epoch-(\d+)\.ckpt)");
  fs::path latest;
  std::size_t latest_epoch = 0;
  for (const auto& p : list_checkpoints(dir)) {
    std::smatch m;
    const std::string name = p.filename().string();
    if (std::regex_match(name, m, epoch_pattern) && (latest.empty() || std::stoull(m[1].str()) >= latest_epoch)) {
      latest = p;
      latest_epoch = std::stoull(m[1].str());
    }
  }
  require(!latest.empty(), ErrorCategory::kMissingComponent, "resume: no epoch checkpoint in " + dir.string());
  return latest;
}

}  // namespace

training::TrainResult Runner::train_translator(std::uint64_t seed, TranslatorRole role, bool resume) {
  const ExperimentData& d = data();
  const LanguageData& lang = role == TranslatorRole::kSweep ? d.sweep : d.main;
  data::ParallelCorpus train = lang.parallel_train, dev = lang.parallel_dev;
  if (role == TranslatorRole::kReverse) {
    train = data::reversed(train);
    dev = data::reversed(dev);
  }
  const fs::path dir = seed_dir(seed) / role_directory(role);
  training::TrainOptions options = seeded(config_.mt_training, seed);
  options.checkpoint_dir = dir;
  if (role == TranslatorRole::kSweep) options.snapshot_steps = config_.sweep.snapshot_steps;
  if (resume) {
    options.resume_from = latest_epoch_checkpoint(dir);
  } else if (fs::exists(dir)) {
    fs::remove_all(dir);
  }
  const std::uint64_t model_seed = seed * 1000 + static_cast<std::uint64_t>(role);
  models::MtModel model(d.vocabulary, config_.mt, model_seed);
  log("train-mt: seed " + std::to_string(seed) + " " + role_directory(role));
  return training::train_mt(model, train, dev, options);
}

training::TrainResult Runner::train_classifier(std::uint64_t seed, bool resume) {
  const ExperimentData& d = data();
  const fs::path dir = seed_dir(seed) / "tc";
  training::TrainOptions options = seeded(config_.tc_training, seed);
  options.checkpoint_dir = dir;
  if (resume) {
    options.resume_from = latest_epoch_checkpoint(dir);
  } else if (fs::exists(dir)) {
    fs::remove_all(dir);
  }
  models::TcModel model(d.vocabulary, config_.tc, seed * 1000 + 10);
  log("train-tc: seed " + std::to_string(seed));
  return training::train_tc(model, d.hr_train, d.hr_dev, options);
}

training::TrainResult Runner::train_baseline(std::uint64_t seed) {
  const ExperimentData& d = data();
  models::MtModel reverse = load_translator(seed, TranslatorRole::kReverse);
  const fs::path dir = seed_dir(seed) / "translate-train";
  if (fs::exists(dir)) fs::remove_all(dir);
  training::TrainOptions options = seeded(config_.tc_training, seed);
  options.checkpoint_dir = dir;
  log("train-baseline: seed " + std::to_string(seed));
  auto [model, result] = pipeline::translate_and_train(reverse, d.hr_train, d.hr_dev, config_.tc, seed * 1000 + 20, options);
  return result;
}

namespace {

fs::path require_best(const fs::path& dir, const std::string& what, const std::string& command) {
  const fs::path best = dir / "best.ckpt";
  require(fs::exists(best), ErrorCategory::kMissingComponent,
          what + " not found at " + best.string() + " (run " + command + ")");
  return best;
}

}  // namespace

models::MtModel Runner::load_translator(std::uint64_t seed, TranslatorRole role) {
  const std::string flag = role == TranslatorRole::kReverse ? " --reverse" : role == TranslatorRole::kSweep ? " --sweep" : "";
  const fs::path path = require_best(seed_dir(seed) / role_directory(role),
                                     role_directory(role) + " translator for seed " + std::to_string(seed),
                                     "train-mt" + flag);
  return pipeline::load_mt(path, data().vocabulary);
}

models::TcModel Runner::load_classifier(std::uint64_t seed) {
  const fs::path path = require_best(seed_dir(seed) / "tc", "classifier for seed " + std::to_string(seed), "train-tc");
  return pipeline::load_tc(path, data().vocabulary);
}

models::TcModel Runner::load_baseline(std::uint64_t seed) {
  const fs::path path = require_best(seed_dir(seed) / "translate-train",
                                     "translate-and-train classifier for seed " + std::to_string(seed),
                                     "train-baseline");
  return pipeline::load_tc(path, data().vocabulary);
}

pipeline::T3lPipeline Runner::assemble(std::uint64_t seed) {
  pipeline::T3lPipeline p(load_translator(seed, TranslatorRole::kForward), load_classifier(seed));
  pipeline::apply_freezing(p, config_.freezing);
  return p;
}

pipeline::T3lPipeline Runner::finetune(std::uint64_t seed, std::size_t k, training::TrainResult* result) {
  require(k > 0, ErrorCategory::kInvalidArgument, "finetune: budget must be 10 or 100 (zero-shot needs no tuning)");
  pipeline::T3lPipeline p = assemble(seed);
  const LanguageData& lang = data().main;
  log("finetune: seed " + std::to_string(seed) + " k=" + std::to_string(k));
  training::TrainResult r = pipeline::finetune_end_to_end(p, lang.fewshot(k), lang.selection, seeded(config_.finetune, seed));
  pipeline::save_pipeline(seed_dir(seed) / ("t3l-" + std::to_string(k)), p,
                          {{"seed", seed}, {"budget", k}, {"training", training::to_json(r)}});
  if (result != nullptr) *result = std::move(r);
  return p;
}

namespace {

bool wants(const ExperimentConfig& c, const std::string& method) {
  return std::find(c.methods.begin(), c.methods.end(), method) != c.methods.end();
}

RunCell cell_from(const std::string& method, std::size_t budget, std::uint64_t seed, const metrics::EvalReport& r) {
  return {method, budget, seed, r.aggregate, r.ms_per_sample, r.count};
}

}  // namespace

RunReport Runner::evaluate() {
  const ExperimentData& d = data();
  const bool t3l = wants(config_, "t3l_soft") || wants(config_, "t3l_hard");
  // Fail before any work if a component is missing.
  for (std::uint64_t seed : config_.seeds) {
    if (t3l || wants(config_, "lm")) load_classifier(seed);
    if (t3l) load_translator(seed, TranslatorRole::kForward);
    if (wants(config_, "translate_train")) load_baseline(seed);
  }
  RunReport report;
  report.metric = metrics::metric_name(training::metric_for(config_.tc.head));
  report.config = to_json(config_);
  const LanguageData& lang = d.main;
  for (std::uint64_t seed : config_.seeds) {
    if (t3l) {
      pipeline::T3lPipeline base = assemble(seed);
      report.translator_bleu[seed] = training::validation_bleu(base.mt(), lang.parallel_test).bleu;
      for (std::size_t k : config_.budgets) {
        pipeline::T3lPipeline p = base;
        if (k > 0) {
          pipeline::finetune_end_to_end(p, lang.fewshot(k), lang.selection, seeded(config_.finetune, seed));
        }
        if (wants(config_, "t3l_soft")) {
          report.cells.push_back(cell_from("t3l_soft", k, seed,
                                           pipeline::evaluate_pipeline(p, lang.test, pipeline::Path::kSoft, config_.threads)));
        }
        if (wants(config_, "t3l_hard")) {
          report.cells.push_back(cell_from("t3l_hard", k, seed,
                                           pipeline::evaluate_pipeline(p, lang.test, pipeline::Path::kHard, config_.threads)));
        }
        log("evaluate: seed " + std::to_string(seed) + " t3l k=" + std::to_string(k) + " done");
      }
    }
    const auto classifier_cells = [&](const std::string& method, const models::TcModel& trained) {
      for (std::size_t k : config_.budgets) {
        models::TcModel model = trained;
        if (k > 0) training::train_tc(model, lang.fewshot(k), lang.selection, seeded(config_.classifier_finetune, seed));
        report.cells.push_back(cell_from(method, k, seed, training::evaluate_classifier(model, lang.test)));
        log("evaluate: seed " + std::to_string(seed) + " " + method + " k=" + std::to_string(k) + " done");
      }
    };
    if (wants(config_, "lm")) classifier_cells("lm", load_classifier(seed));
    if (wants(config_, "translate_train")) classifier_cells("translate_train", load_baseline(seed));
  }
  report.write(report_dir());
  return report;
}

RunReport Runner::report() {
  const fs::path csv = report_dir() / "run.csv";
  std::ifstream in(csv);
  require(static_cast<bool>(in), ErrorCategory::kMissingComponent, "run report not found at " + csv.string() + " (run evaluate)");
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunReport r = RunReport::from_csv(buffer.str());
  r.config = to_json(config_);
  nlohmann::json summary = {{"format", "t3l-summary"}, {"metric", r.metric}};
  for (const auto& a : r.averages()) {
    summary["averages"].push_back({{"method", a.method}, {"budget", a.budget}, {"mean", a.mean}, {"seeds", a.seeds}});
  }
  summary["soft_vs_hard"] = nlohmann::json::array();
  for (const auto& dlt : r.soft_hard_deltas()) {
    summary["soft_vs_hard"].push_back({{"budget", dlt.budget},
                                       {"seed", dlt.seed == 0 ? nlohmann::json("mean") : nlohmann::json(dlt.seed)},
                                       {"delta", dlt.delta}});
  }
  std::ofstream(report_dir() / "summary.json") << summary.dump(2) << '\n';
  return r;
}

RunReport Runner::run_all(bool force) {
  gen_data(force);
  const auto& methods = config_.methods;
  const bool baseline = std::find(methods.begin(), methods.end(), "translate_train") != methods.end();
  for (auto seed : config_.seeds) {
    train_translator(seed, TranslatorRole::kForward);
    train_classifier(seed);
    if (baseline) {
      train_translator(seed, TranslatorRole::kReverse);
      train_baseline(seed);
    }
  }
  evaluate();
  return report();
}

SweepReport Runner::sweep_bleu(std::uint64_t seed) {
  const ExperimentData& d = data();
  const fs::path dir = seed_dir(seed) / role_directory(TranslatorRole::kSweep);
  const auto checkpoints = list_checkpoints(dir);
  require(checkpoints.size() >= 3, ErrorCategory::kMissingComponent,
          "sweep-bleu: need at least 3 translator checkpoints in " + dir.string() + ", found " +
              std::to_string(checkpoints.size()) + " (run train-mt --sweep)");
  const models::TcModel classifier = load_classifier(seed);
  SweepReport report;
  report.seed = seed;
  report.severity = config_.sweep.severity;
  report.metric = metrics::metric_name(training::metric_for(config_.tc.head));
  for (const auto& path : checkpoints) {
    const nn::Checkpoint ck = nn::load_checkpoint(path);
    const auto& history = ck.metadata.at("result").at("history");
    models::MtModel mt = pipeline::load_mt(path, d.vocabulary);
    SweepPoint point;
    point.checkpoint = path.filename().string();
    const std::string name = point.checkpoint;
    if (name.rfind("step-", 0) == 0) {
      point.optimizer_steps = std::stoull(name.substr(5));
    } else {
      point.optimizer_steps = history.empty() ? 0 : history.back().at("optimizer_steps").get<std::size_t>();
    }
    point.bleu = training::validation_bleu(mt, d.sweep.parallel_test).bleu;
    pipeline::T3lPipeline base(std::move(mt), classifier);
    pipeline::apply_freezing(base, config_.freezing);
    for (std::size_t k : config_.sweep.budgets) {
      pipeline::T3lPipeline p = base;
      if (k > 0) pipeline::finetune_end_to_end(p, d.sweep.fewshot(k), d.sweep.selection, seeded(config_.finetune, seed));
      point.metric[k] = pipeline::evaluate_pipeline(p, d.sweep.test, pipeline::Path::kSoft, config_.threads).aggregate;
    }
    log("sweep-bleu: " + point.checkpoint + " bleu " + std::to_string(point.bleu));
    report.points.push_back(std::move(point));
  }
  report.write(report_dir());
  return report;
}

}  // namespace t3l::harness
