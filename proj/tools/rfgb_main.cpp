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

// rfgb: generate data, induce comm facts, train, predict, evaluate, sweep.

#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "rfgb/pipeline.hpp"

namespace {

using rfgb::RunConfig;

void add_training_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--stages", cfg.n_stages, "boosting stages")->capture_default_str();
  cmd->add_option("--depth", cfg.max_depth, "maximum tree depth")->capture_default_str();
  cmd->add_option("--min-leaf", cfg.min_leaf, "minimum examples per leaf")->capture_default_str();
  cmd->add_option("--preset", cfg.preset, "mode preset: content or hybrid")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "seed recorded in the model");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Relational functional gradient boosting for job recommendation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset directory");
  gen->add_option("--out", cfg.out, "dataset directory to write")->required();
  gen->add_option("--config", cfg.synth_config, "synth config file (key=value)");
  gen->add_option("--seed", cfg.seed, "overrides the config seed");

  auto* induce = app.add_subcommand("induce", "copy a dataset, adding comm* facts");
  induce->add_option("--data", cfg.data, "input dataset directory")->required();
  induce->add_option("--out", cfg.out, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "train a model on the training split");
  train->add_option("--data", cfg.data, "dataset directory")->required();
  train->add_option("--model", cfg.model, "model file to write (log goes to <model>.log)")->required();
  train->add_option("--alpha", cfg.alpha, "false-negative cost")->capture_default_str();
  train->add_option("--beta", cfg.beta, "false-positive cost")->capture_default_str();
  add_training_flags(train, cfg);

  auto* predict = app.add_subcommand("predict", "score the examples of a split");
  predict->add_option("--data", cfg.data, "dataset directory")->required();
  predict->add_option("--model", cfg.model, "model file")->required();
  predict->add_option("--out", cfg.out, "scores file to write")->required();
  predict->add_option("--split", cfg.split, "train or test")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "evaluate a model on the test split");
  eval->add_option("--data", cfg.data, "dataset directory")->required();
  eval->add_option("--model", cfg.model, "model file")->required();
  eval->add_option("--out", cfg.out, "report file (CSV goes to <out>.csv)")->required();
  eval->add_option("--threshold", cfg.threshold, "decision threshold")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "train and evaluate over a cost grid");
  sweep->add_option("--data", cfg.data, "dataset directory")->required();
  sweep->add_option("--out", cfg.out, "report file (CSV goes to <out>.csv)")->required();
  sweep->add_option("--alpha", cfg.alphas, "alpha values")->delimiter(',')->capture_default_str();
  sweep->add_option("--beta", cfg.betas, "beta values")->delimiter(',')->capture_default_str();
  sweep->add_option("--threshold", cfg.threshold, "decision threshold")->capture_default_str();
  add_training_flags(sweep, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(rfgb::ErrorKind::kConfig);
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    rfgb::run(cfg);
    if (cfg.command == "eval" || cfg.command == "sweep") {
      std::ifstream report(cfg.out);
      std::cout << report.rdbuf();
    }
  } catch (const rfgb::Error& e) {
    std::cerr << "rfgb " << cfg.command << ": " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rfgb " << cfg.command << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
