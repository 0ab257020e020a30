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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. `acceptance 1 4 9` runs a subset.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rfgb/pipeline.hpp"

namespace rfgb {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome gradient_reduction() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int label = static_cast<int>(rng() % 2);
    // mix of interior and extreme probabilities
    double p = u(rng);
    if (i % 10 == 0) p = std::pow(10.0, -12 * u(rng));
    if (i % 10 == 1) p = 1 - std::pow(10.0, -12 * u(rng));
    const auto g = gradient_cost(label, p, {0, 0});
    if (g.delta != gradient_standard(label, p) || g.lambda != 1.0) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 1.0,
          std::to_string(bad) + " of 1000 differ, " + fmt("%.4f s", secs)};
}

// 2 ---------------------------------------------------------------------------

Outcome lambda_limits() {
  int bad = 0;
  double worst = 0;
  for (double p : {0.01, 0.1, 0.5, 0.9, 0.99}) {
    const double hi = gradient_cost(kMisMatch, p, {0, 30}).delta;
    const double lo = gradient_cost(kMisMatch, p, {0, -30}).delta;
    worst = std::max({worst, std::abs(hi + 1), std::abs(lo)});
    if (std::abs(hi + 1) > 1e-6 || std::abs(lo) > 1e-6) ++bad;
    double prev = INFINITY;
    for (double b : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
      const double d = gradient_cost(kMisMatch, p, {0, b}).delta;
      if (!(d < prev)) ++bad;
      prev = d;
    }
  }
  return {bad == 0, "worst limit gap " + fmt("%.3g", worst) + ", " + std::to_string(bad) +
                        " violations"};
}

// 3 ---------------------------------------------------------------------------

Outcome objective_gradient_consistency() {
  auto vocab = std::make_shared<Vocabulary>();
  vocab->declare_predicate("match", {"user", "job"});
  FactBase fb(vocab);
  const GroundAtom atom{vocab->predicate_id("match"),
                        {vocab->intern("u", vocab->type_id("user")),
                         vocab->intern("j", vocab->type_id("job"))}};
  fb.freeze();
  BoostedModel model;
  model.vocab = vocab;
  model.target = atom.pred;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const int label = static_cast<int>(rng() % 2);
    const double psi = u(rng);
    const CostParams cost{u(rng), u(rng)};
    const std::vector<LabeledExample> one = {{atom, label}}, none;
    const auto& pos = label == kMatch ? one : none;
    const auto& neg = label == kMatch ? none : one;
    const double h = 1e-5;
    model.psi0 = psi + h;
    const double up_at = model.psi0;
    const long double up = penalized_loglik<long double>(model, pos, neg, fb, cost);
    model.psi0 = psi - h;
    const double down_at = model.psi0;
    const long double down = penalized_loglik<long double>(model, pos, neg, fb, cost);
    const double fd = static_cast<double>((up - down) / (up_at - down_at));
    const double analytic = gradient_cost(label, sigmoid(psi), cost).delta;
    worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-300));
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.3g", worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome tree_oracle() {
  std::mt19937_64 rng(4);
  int agree = 0;
  TreeParams params;
  params.max_depth = 1;
  params.min_leaf_examples = 1;
  for (int trial = 0; trial < 50; ++trial) {
    const auto pc = oracle::make_propositional_case(rng);
    const auto tree = learn_tree(pc.examples, *pc.fb, pc.modes, params);
    const int expected = oracle::best_propositional_split(pc);
    const bool ok = expected < 0 ? tree.nodes.size() == 1
                                 : tree.nodes.size() == 3 &&
                                       pc.vocab->predicate(tree.nodes[0].test[0].pred).name ==
                                           pc.pred_names[expected];
    agree += ok;
  }
  return {agree == 50, std::to_string(agree) + "/50 agree"};
}

// 5 ---------------------------------------------------------------------------

Outcome auc_oracle() {
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 400);
    const int levels = 1 + static_cast<int>(rng() % 50);
    std::vector<ScoredExample> s;
    std::vector<double> pos, neg;
    for (int i = 0; i < n; ++i) {
      const int label = i == 0 ? kMatch : i == 1 ? kMisMatch : static_cast<int>(rng() % 2);
      const double score = static_cast<double>(rng() % levels) / levels;
      s.push_back({GroundAtom{}, label, score});
      (label == kMatch ? pos : neg).push_back(score);
    }
    worst = std::max(worst, std::abs(auc_roc(s) - oracle::auc_pairs(pos, neg)));
  }
  return {worst <= 1e-12, "max difference " + fmt("%.3g", worst)};
}

// 6 ---------------------------------------------------------------------------

Outcome metric_arithmetic() {
  const auto s = summary({53, 544, 511, 0});
  const bool ok = std::abs(*s.recall - 1.000) <= 1e-3 && std::abs(*s.fpr - 0.516) <= 1e-3 &&
                  std::abs(*s.precision - 0.089) <= 1e-3 && std::abs(*s.accuracy - 0.509) <= 1e-3;
  return {ok, "recall " + fmt("%.4f", *s.recall) + " fpr " + fmt("%.4f", *s.fpr) + " precision " +
                  fmt("%.4f", *s.precision) + " accuracy " + fmt("%.4f", *s.accuracy)};
}

// 7, 8 ------------------------------------------------------------------------

constexpr int kSeeds = 5;
constexpr int kFirstSeed = 5;  // seeds 0-4 were used to pick the generator defaults

struct SeedResult {
  double content_auc = 0, hybrid_auc = 0;
  Summary hard, soft;  // hybrid at beta 0 and beta 2
  std::uint64_t hard_fp = 0, soft_fp = 0;
};

struct Experiment {
  std::vector<SeedResult> seeds;
  double q1_seconds = 0;  // content + hybrid at beta 0
  double q2_seconds = 0;  // hybrid at beta 2
};

std::vector<ScoredExample> fit_and_score(const DatasetSplit& d, const std::string& preset,
                                         double beta) {
  TrainConfig config;
  config.cost = {0, beta};
  config.mask_predicate = std::string(rec::kApplied);
  const auto modes = rec::mode_preset(preset, *d.vocab);
  const auto model = train(d.train_pos, d.train_neg, *d.fb_train, modes, config);
  return score_examples(model, *d.fb_test, d.test_pos, d.test_neg);
}

const Experiment& synthetic_experiment() {
  static const Experiment e = [] {
    Experiment out;
    for (int seed = kFirstSeed; seed < kFirstSeed + kSeeds; ++seed) {
      SynthConfig c;  // 500 users, 2000 jobs, apply_noise 0.1
      c.seed = static_cast<std::uint64_t>(seed);
      SeedResult r;
      auto t0 = Clock::now();
      const auto d = synth_generate(c);
      r.content_auc = auc_roc(fit_and_score(d, "content", 0));
      const auto hard = fit_and_score(d, "hybrid", 0);
      out.q1_seconds += seconds_since(t0);
      t0 = Clock::now();
      const auto soft = fit_and_score(d, "hybrid", 2);
      out.q2_seconds += seconds_since(t0);
      r.hybrid_auc = auc_roc(hard);
      const auto cm_hard = confusion(hard, 0.5), cm_soft = confusion(soft, 0.5);
      r.hard = summary(cm_hard);
      r.soft = summary(cm_soft);
      r.hard_fp = cm_hard.fp;
      r.soft_fp = cm_soft.fp;
      std::cout << "  seed " << seed << ": content AUC " << fmt("%.4f", r.content_auc)
                << ", hybrid AUC " << fmt("%.4f", r.hybrid_auc) << ", FPR "
                << fmt("%.4f", *r.hard.fpr) << " -> " << fmt("%.4f", *r.soft.fpr) << ", accuracy "
                << fmt("%.4f", *r.hard.accuracy) << " -> " << fmt("%.4f", *r.soft.accuracy)
                << std::endl;
      out.seeds.push_back(r);
    }
    return out;
  }();
  return e;
}

Outcome hybrid_beats_content() {
  const auto& e = synthetic_experiment();
  double content = 0, hybrid = 0;
  for (const auto& r : e.seeds) {
    content += r.content_auc;
    hybrid += r.hybrid_auc;
  }
  content /= kSeeds;
  hybrid /= kSeeds;
  const bool ok = hybrid - content >= 0.03 && e.q1_seconds < 600;
  return {ok, "mean AUC content " + fmt("%.4f", content) + ", hybrid " + fmt("%.4f", hybrid) +
                  ", gain " + fmt("%.4f", hybrid - content) + ", " + fmt("%.0f s", e.q1_seconds)};
}

Outcome soft_margin_cuts_fpr() {
  const auto& e = synthetic_experiment();
  int lower = 0;
  double worst_drop = -1;
  for (const auto& r : e.seeds) {
    lower += *r.soft.fpr < *r.hard.fpr;
    worst_drop = std::max(worst_drop, *r.hard.accuracy - *r.soft.accuracy);
  }
  const bool ok = lower == kSeeds && worst_drop <= 0.05;
  return {ok, "FPR lower on " + std::to_string(lower) + "/" + std::to_string(kSeeds) +
                  " seeds, largest accuracy drop " + fmt("%.4f", worst_drop) + ", " +
                  fmt("%.0f s", e.q2_seconds)};
}

// 9 ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "rfgb_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto synth = root / "synth.txt";
  {
    std::ofstream out(synth);
    out << "n_users=120\nn_jobs=300\n";
  }
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / ("run" + std::to_string(run));
    RunConfig cfg;
    cfg.seed = 7;
    cfg.synth_config = synth;
    cfg.data = dir / "data";
    cfg.out = cfg.data;
    cfg.command = "gen";
    rfgb::run(cfg);
    cfg.model = dir / "model.txt";
    cfg.beta = 2;
    cfg.command = "train";
    rfgb::run(cfg);
    cfg.out = dir / "scores.tsv";
    cfg.command = "predict";
    rfgb::run(cfg);
    cfg.out = dir / "report.txt";
    cfg.command = "eval";
    rfgb::run(cfg);
    std::vector<std::string> files;
    names.clear();
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      names.push_back(fs::relative(entry.path(), dir).string());
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) files.push_back(slurp(dir / n));
    runs.push_back(std::move(files));
  }
  int differ = 0;
  for (std::size_t i = 0; i < names.size(); ++i) differ += runs[0][i] != runs[1][i];
  fs::remove_all(root);
  return {differ == 0 && names.size() >= 14,
          std::to_string(names.size()) + " artifacts, " + std::to_string(differ) + " differ"};
}

// 10 --------------------------------------------------------------------------

long peak_rss_mib() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss / 1024;
}

SynthConfig scale_config() {
  SynthConfig c;
  c.n_users = 3000;
  c.n_jobs = 4000;
  // Fewer recommendations per pair keep the example count moderate; the
  // fact base is dominated by comm* facts.
  c.match_rec_rate = 0.03;
  c.rec_rate = 0.003;
  c.far_rec_rate = 0.0001;
  c.seed = 10;
  return c;
}

Outcome scale_smoke() {
  const auto t0 = Clock::now();
  const auto d = synth_generate(scale_config());
  const std::size_t facts = d.fb_train->size();
  const double gen_secs = seconds_since(t0);
  TrainConfig config;
  config.n_stages = 20;
  config.mask_predicate = std::string(rec::kApplied);
  const auto t1 = Clock::now();
  const auto model = train(d.train_pos, d.train_neg, *d.fb_train,
                           rec::mode_preset("hybrid", *d.vocab), config);
  const double secs = seconds_since(t1);
  const long rss = peak_rss_mib();
  const bool ok = facts >= 1'000'000 && model.stages.size() == 20 && secs < 1800 && rss < 4096;
  return {ok, std::to_string(facts) + " training facts, " +
                  std::to_string(d.train_pos.size() + d.train_neg.size()) + " examples, gen " +
                  fmt("%.0f s", gen_secs) + ", 20 stages " + fmt("%.0f s", secs) + ", peak RSS " +
                  std::to_string(rss) + " MiB"};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "gradient reduction at zero cost", gradient_reduction},
    {2, "lambda limits and monotonicity in beta", lambda_limits},
    {3, "objective-gradient consistency", objective_gradient_consistency},
    {4, "tree learner vs exhaustive split search", tree_oracle},
    {5, "AUC-ROC vs pair counting", auc_oracle},
    {6, "metric arithmetic on the published hybrid row", metric_arithmetic},
    {7, "hybrid beats content on AUC-ROC", hybrid_beats_content},
    {8, "soft margin lowers FPR", soft_margin_cuts_fpr},
    {9, "pipeline determinism", determinism},
    {10, "scale smoke test", scale_smoke},
};

}  // namespace
}  // namespace rfgb

int main(int argc, char** argv) {
  // ctest hides the output of passing tests, so the lines are also written here.
  std::ofstream report;
  if (const char* path = std::getenv("RFGB_ACCEPTANCE_REPORT")) report.open(path);
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : rfgb::kCriteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    rfgb::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
         << "): " << o.detail;
    std::cout << line.str() << std::endl;
    if (report) report << line.str() << std::endl;
  }
  return failed ? 1 : 0;
}
