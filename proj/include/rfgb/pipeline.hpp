/*
 * Copyright 2026 The RFGB Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end commands over dataset directories: gen, induce, train,
// predict, eval, sweep. Each reads only its declared inputs and writes only
// its declared outputs, atomically.

#ifndef RFGB_PIPELINE_HPP_
#define RFGB_PIPELINE_HPP_

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rfgb/dataset.hpp"
#include "rfgb/metrics.hpp"
#include "rfgb/synth.hpp"

namespace rfgb {

struct RunConfig {
  std::string command;
  fs::path data;
  fs::path model;
  fs::path out;
  fs::path synth_config;  // gen only; defaults when empty
  double alpha = 0;
  double beta = 0;
  int n_stages = 20;
  int max_depth = 3;
  int min_leaf = 8;
  std::optional<std::uint64_t> seed;
  std::string preset = "hybrid";
  double threshold = 0.5;
  std::string split = "test";  // predict only
  std::vector<double> alphas{0};
  std::vector<double> betas{0, 2};
};

inline TrainConfig train_config(const RunConfig& cfg, const CostParams& cost) {
  TrainConfig t;
  t.cost = cost;
  t.n_stages = cfg.n_stages;
  t.tree.max_depth = cfg.max_depth;
  t.tree.min_leaf_examples = cfg.min_leaf;
  t.seed = cfg.seed.value_or(0);
  // Each example's own application fact is evidence of its label.
  t.mask_predicate = std::string(rec::kApplied);
  t.validate();
  return t;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline void check_threshold(double t) {
  require(t >= 0 && t <= 1, "threshold must be in [0, 1]");
}

// ---------------------------------------------------------------------------

inline void run_gen(const RunConfig& cfg) {
  require(!cfg.out.empty(), "gen needs --out");
  SynthConfig c;
  if (!cfg.synth_config.empty()) {
    auto in = open_input(cfg.synth_config);
    c = with_file(cfg.synth_config, [&] { return parse_synth_config(in); });
  }
  if (cfg.seed) c.seed = *cfg.seed;
  write_synth_dataset(cfg.out, synth_generate(c), c);
}

inline void run_induce(const RunConfig& cfg) {
  require(!cfg.data.empty() && !cfg.out.empty(), "induce needs --data and --out");
  require(fs::weakly_canonical(cfg.data) != fs::weakly_canonical(cfg.out),
          "induce writes a new directory; --out must differ from --data");
  auto d = load_dataset(cfg.data);
  d.fb_train = std::make_unique<FactBase>(rec::induce_comm(*d.fb_train));
  d.fb_test = std::make_unique<FactBase>(rec::induce_comm(*d.fb_test));
  d.fb_train->freeze();  // canonical fact order on output
  d.fb_test->freeze();
  write_dataset(cfg.out, d);
  for (const char* name : {"modes_content.txt", "modes_hybrid.txt"}) {
    if (!fs::exists(cfg.data / name)) continue;
    std::error_code ec;
    fs::copy_file(cfg.data / name, cfg.out / name, fs::copy_options::overwrite_existing, ec);
    if (ec) throw ConfigError("cannot copy '" + std::string(name) + "': " + ec.message());
  }
}

// Trains on the dataset's training split. `log` receives one line per stage.
inline BoostedModel train_on(const DatasetSplit& d, const RunConfig& cfg, const CostParams& cost,
                             std::ostream* log = nullptr) {
  const auto config = train_config(cfg, cost);
  const auto modes = load_modes(cfg.data, cfg.preset, *d.vocab);
  if (log) *log << "# stage objective leaves\n";
  return train(d.train_pos, d.train_neg, *d.fb_train, modes, config, [&](const StageReport& r) {
    if (log) *log << r.stage << ' ' << text::format_double(r.objective) << ' ' << r.leaves << '\n';
  });
}

inline fs::path log_path(const fs::path& model) {
  fs::path p = model;
  p += ".log";
  return p;
}

inline void run_train(const RunConfig& cfg) {
  require(!cfg.data.empty() && !cfg.model.empty(), "train needs --data and --model");
  train_config(cfg, {cfg.alpha, cfg.beta});  // fail before loading
  const auto d = load_dataset(cfg.data);
  std::ostringstream log;
  const auto model = train_on(d, cfg, {cfg.alpha, cfg.beta}, &log);
  write_file_atomic(cfg.model, model_to_string(model));
  write_file_atomic(log_path(cfg.model), log.str());
}

inline BoostedModel load_model(const fs::path& path, const DatasetSplit& d) {
  auto in = open_input(path);
  auto model = read_model(in, d.vocab);
  if (model.vocab->predicate(model.target).name != rec::kTarget) {
    throw ModelError("model target is not '" + std::string(rec::kTarget) + "'");
  }
  return model;
}

inline std::vector<ScoredExample> score_split(const BoostedModel& model, const DatasetSplit& d,
                                              const std::string& split) {
  if (split == "test") return score_examples(model, *d.fb_test, d.test_pos, d.test_neg);
  if (split == "train") return score_examples(model, *d.fb_train, d.train_pos, d.train_neg);
  throw ConfigError("split must be 'train' or 'test', got '" + split + "'");
}

inline void run_predict(const RunConfig& cfg) {
  require(!cfg.data.empty() && !cfg.model.empty() && !cfg.out.empty(),
          "predict needs --data, --model and --out");
  require(cfg.split == "train" || cfg.split == "test", "split must be 'train' or 'test'");
  const auto d = load_dataset(cfg.data);
  const auto model = load_model(cfg.model, d);
  const auto scored = score_split(model, d, cfg.split);
  write_with(cfg.out, [&](std::ostream& o) { write_scores(o, *d.vocab, scored); });
}

inline fs::path csv_path(const fs::path& report) {
  fs::path p = report;
  p += ".csv";
  return p;
}

inline void write_report(const fs::path& out, const std::vector<EvalRow>& rows) {
  write_with(out, [&](std::ostream& o) { write_table(o, rows); });
  write_with(csv_path(out), [&](std::ostream& o) { write_csv(o, rows); });
}

inline EvalRow run_eval(const RunConfig& cfg) {
  require(!cfg.data.empty() && !cfg.model.empty() && !cfg.out.empty(),
          "eval needs --data, --model and --out");
  check_threshold(cfg.threshold);
  const auto d = load_dataset(cfg.data);
  const auto model = load_model(cfg.model, d);
  const auto row = evaluate(score_split(model, d, "test"), cfg.threshold, model.config.cost.alpha,
                            model.config.cost.beta);
  write_report(cfg.out, {row});
  return row;
}

inline std::vector<EvalRow> run_sweep(const RunConfig& cfg) {
  require(!cfg.data.empty() && !cfg.out.empty(), "sweep needs --data and --out");
  check_threshold(cfg.threshold);
  for (double a : cfg.alphas) train_config(cfg, {a, 0});
  for (double b : cfg.betas) train_config(cfg, {0, b});
  const auto d = load_dataset(cfg.data);
  const auto rows = sweep(
      [&](const CostParams& cost) { return score_split(train_on(d, cfg, cost), d, "test"); },
      cfg.alphas, cfg.betas, cfg.threshold);
  write_report(cfg.out, rows);
  return rows;
}

inline void run(const RunConfig& cfg) {
  if (cfg.command == "gen") return run_gen(cfg);
  if (cfg.command == "induce") return run_induce(cfg);
  if (cfg.command == "train") return run_train(cfg);
  if (cfg.command == "predict") return run_predict(cfg);
  if (cfg.command == "eval") return void(run_eval(cfg));
  if (cfg.command == "sweep") return void(run_sweep(cfg));
  throw ConfigError("unknown command '" + cfg.command + "'");
}

}  // namespace rfgb

#endif  // RFGB_PIPELINE_HPP_
