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

// Relational functional gradient boosting with a cost-sensitive objective.
//
// The model is a potential psi(x) = psi0 + sum_k tree_k(x) over groundings
// x of a binary target predicate, and P(Match | x) = sigmoid(psi(x)).
//
// With costs alpha (misclassified positives) and beta (misclassified
// negatives) the per-example objective is
//
//   log J_i = psi(yhat_i) - log sum_{y'} exp(psi(y') + c(yhat_i, y'))
//
// with psi(MisMatch) = 0, c(Match, MisMatch) = alpha and
// c(MisMatch, Match) = beta. Its derivative in psi is
//
//   delta_i = I(yhat_i = Match) - lambda_i * p_i
//   lambda_i = 1 / (p + (1 - p) e^alpha)      for positives
//   lambda_i = 1 / (p + (1 - p) e^-beta)      for negatives
//
// which reduces to I(yhat_i = Match) - p_i when alpha = beta = 0. Each
// boosting stage fits a relational regression tree to the deltas.

#ifndef RFGB_BOOST_HPP_
#define RFGB_BOOST_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rfgb/factstore.hpp"
#include "rfgb/modes.hpp"
#include "rfgb/parallel.hpp"
#include "rfgb/tree.hpp"

namespace rfgb {

inline constexpr int kMisMatch = 0;
inline constexpr int kMatch = 1;

struct LabeledExample {
  GroundAtom target;
  int label = kMisMatch;  // kMatch or kMisMatch
};

struct CostParams {
  double alpha = 0;  // false-negative penalty
  double beta = 0;   // false-positive penalty

  void validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
      throw ConfigError("alpha and beta must be finite");
    }
  }

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

inline double sigmoid(double psi) {
  if (psi >= 0) return 1.0 / (1.0 + std::exp(-psi));
  const double e = std::exp(psi);
  return e / (1.0 + e);
}

inline constexpr double kMinProbability = 1e-12;

inline double clamp_probability(double p) {
  return std::clamp(p, kMinProbability, 1.0 - kMinProbability);
}

inline double gradient_standard(int label, double p) {
  return (label == kMatch ? 1.0 : 0.0) - p;
}

// lambda is exactly 1 whenever the relevant cost is zero.
inline double cost_lambda(int label, double p, const CostParams& cost) {
  if (label == kMatch) {
    if (cost.alpha == 0) return 1.0;
    return 1.0 / (p + (1.0 - p) * std::exp(cost.alpha));
  }
  if (cost.beta == 0) return 1.0;
  // e^b / (p e^b + 1 - p), rewritten so large beta cannot overflow.
  return 1.0 / (p + (1.0 - p) * std::exp(-cost.beta));
}

struct GradientRecord {
  int label = kMisMatch;
  double p = 0.5;
  double delta = 0;
  double lambda = 1;
};

inline GradientRecord gradient_cost(int label, double p, const CostParams& cost) {
  GradientRecord r;
  r.label = label;
  r.p = p;
  r.lambda = cost_lambda(label, p, cost);
  r.delta = (label == kMatch ? 1.0 : 0.0) - r.lambda * p;
  return r;
}

// log(e^a + e^b) without overflow.
template <typename Real>
Real log_add_exp(Real a, Real b) {
  using std::exp;
  using std::log1p;
  const Real hi = std::max(a, b);
  const Real lo = std::min(a, b);
  return hi + log1p(exp(lo - hi));
}

// One example's contribution to log J at potential `psi`.
template <typename Real>
Real log_objective_term(int label, Real psi, const CostParams& cost) {
  if (label == kMatch) return psi - log_add_exp<Real>(psi, static_cast<Real>(cost.alpha));
  return -log_add_exp<Real>(psi + static_cast<Real>(cost.beta), Real(0));
}

struct TrainConfig {
  TreeParams tree;
  CostParams cost;
  int n_stages = 20;
  std::uint64_t seed = 0;
  double psi0 = 0;
  double step = 1.0;  // multiplier on each stage's tree
  // Predicate whose fact p(args of the example) is hidden while the example
  // is evaluated (leave-one-out). Must share the target's signature.
  std::optional<std::string> mask_predicate;
  unsigned workers = 0;  // 0: worker_count(); not recorded in the model

  void validate() const {
    tree.validate();
    cost.validate();
    if (n_stages < 1) throw ConfigError("n_stages must be >= 1");
    if (!std::isfinite(psi0)) throw ConfigError("psi0 must be finite");
    if (!std::isfinite(step) || step <= 0) throw ConfigError("step must be a positive real");
  }
};

class BoostedModel {
 public:
  std::shared_ptr<Vocabulary> vocab;
  PredId target = 0;
  double psi0 = 0;
  std::vector<RegressionTree> stages;
  TrainConfig config;

  std::optional<PredId> mask_pred() const {
    if (!config.mask_predicate) return std::nullopt;
    return vocab->find_predicate(*config.mask_predicate);
  }

  double psi(const FactBase& fb, const GroundAtom& atom) const {
    check_target(fb, atom);
    const auto mask = example_mask(mask_pred(), atom.args);
    double v = psi0;
    for (const auto& tree : stages) v += config.step * tree.route(fb, atom.args, &mask);
    return v;
  }

  double predict_prob(const FactBase& fb, const GroundAtom& atom) const {
    return sigmoid(psi(fb, atom));
  }

 private:
  void check_target(const FactBase& fb, const GroundAtom& atom) const {
    if (fb.shared_vocab() != vocab) throw ModelError("fact base and model use different vocabularies");
    if (atom.pred != target) {
      throw ModelError("atom over '" + vocab->predicate(atom.pred).name +
                       "' does not match model target '" + vocab->predicate(target).name + "'");
    }
    check_atom(*vocab, atom);
  }
};

// Sum of log_objective_term over the examples under `model`. Real selects
// the accumulation precision.
template <typename Real = double>
Real penalized_loglik(const BoostedModel& model, const std::vector<LabeledExample>& pos,
                      const std::vector<LabeledExample>& neg, const FactBase& fb,
                      const CostParams& cost) {
  Real total = 0;
  for (const auto& ex : pos) {
    total += log_objective_term<Real>(kMatch, model.psi(fb, ex.target), cost);
  }
  for (const auto& ex : neg) {
    total += log_objective_term<Real>(kMisMatch, model.psi(fb, ex.target), cost);
  }
  return total;
}

struct StageReport {
  int stage = 0;            // 1-based
  double objective = 0;     // penalized log-likelihood after the stage
  std::size_t leaves = 0;
};

namespace detail {

inline std::optional<PredId> resolve_mask(const Vocabulary& vocab, PredId target,
                                          const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  const PredId p = vocab.predicate_id(*name);
  if (vocab.predicate(p).arg_types != vocab.predicate(target).arg_types) {
    throw SchemaError("mask predicate '" + *name + "' must have the target's signature");
  }
  return p;
}

}  // namespace detail

// Functional gradient ascent: each stage fits a tree to the current
// deltas of every example and adds it to the potential.
inline BoostedModel train(const std::vector<LabeledExample>& pos,
                          const std::vector<LabeledExample>& neg, const FactBase& fb,
                          const std::vector<ModeDecl>& modes, const TrainConfig& config,
                          const std::function<void(const StageReport&)>& on_stage = {}) {
  config.validate();
  if (pos.empty()) throw TrainingError("no positive examples");
  if (neg.empty()) throw TrainingError("no negative examples");
  if (!fb.frozen()) throw TrainingError("fact base must be frozen before training");
  const auto& vocab = fb.vocab();
  const PredId target = pos.front().target.pred;

  std::vector<const LabeledExample*> all;
  for (const auto& e : pos) {
    if (e.label != kMatch) throw TrainingError("positive example not labeled Match");
    all.push_back(&e);
  }
  for (const auto& e : neg) {
    if (e.label != kMisMatch) throw TrainingError("negative example not labeled MisMatch");
    all.push_back(&e);
  }
  for (const auto* e : all) {
    if (e->target.pred != target) throw TrainingError("examples mix target predicates");
    check_atom(vocab, e->target);
  }
  check_modes(vocab, modes, target);

  BoostedModel model;
  model.vocab = fb.shared_vocab();
  model.target = target;
  model.psi0 = config.psi0;
  model.config = config;
  const auto mask_pred = detail::resolve_mask(vocab, target, config.mask_predicate);
  const ConstantPool pool(fb, modes, config.tree.const_candidates_cap);
  LearnOptions options;
  options.mask_pred = mask_pred;
  options.workers = config.workers;
  options.pool = &pool;

  std::vector<FactMask> masks;
  masks.reserve(all.size());
  for (const auto* e : all) masks.push_back(example_mask(mask_pred, e->target.args));

  std::vector<double> psi(all.size(), config.psi0);
  std::vector<RegressionExample> regression(all.size());
  for (int stage = 0; stage < config.n_stages; ++stage) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      const double p = clamp_probability(sigmoid(psi[i]));
      regression[i].target = all[i]->target;
      regression[i].value = gradient_cost(all[i]->label, p, config.cost).delta;
    }
    RegressionTree tree = learn_tree(regression, fb, modes, config.tree, options);
    parallel_for(
        all.size(),
        [&](std::size_t i, unsigned) {
          psi[i] += config.step * tree.route(fb, all[i]->target.args, &masks[i]);
        },
        options.workers ? options.workers : worker_count());
    model.stages.push_back(std::move(tree));
    if (on_stage) {
      StageReport report;
      report.stage = stage + 1;
      report.leaves = model.stages.back().leaf_count();
      for (std::size_t i = 0; i < all.size(); ++i) {
        report.objective += log_objective_term(all[i]->label, psi[i], config.cost);
      }
      on_stage(report);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Model file
//
//   rfgb-model 1
//   type user.                      (schema, as in schema files)
//   pred match(user, job).
//   target match
//   mask prAppliedJob               (or `mask none`)
//   psi0 0
//   alpha 0
//   beta 2
//   max_depth 3
//   min_leaf 8
//   max_literals 2
//   const_cap 16
//   n_stages 20
//   seed 0
//   step 1
//   tree (node userSkill(U,S1), jobSkill(J,S1) (leaf 0.5) (leaf -0.5))
//   ...

inline constexpr std::string_view kModelHeader = "rfgb-model 1";

inline void write_model(std::ostream& out, const BoostedModel& model) {
  const auto& vocab = *model.vocab;
  const auto& c = model.config;
  out << kModelHeader << '\n';
  write_schema(out, vocab);
  out << "target " << vocab.predicate(model.target).name << '\n';
  out << "mask " << (c.mask_predicate ? *c.mask_predicate : std::string("none")) << '\n';
  out << "psi0 " << text::format_double(model.psi0) << '\n';
  out << "alpha " << text::format_double(c.cost.alpha) << '\n';
  out << "beta " << text::format_double(c.cost.beta) << '\n';
  out << "max_depth " << c.tree.max_depth << '\n';
  out << "min_leaf " << c.tree.min_leaf_examples << '\n';
  out << "max_literals " << c.tree.max_literals_per_node << '\n';
  out << "const_cap " << c.tree.const_candidates_cap << '\n';
  out << "n_stages " << c.n_stages << '\n';
  out << "seed " << c.seed << '\n';
  out << "step " << text::format_double(c.step) << '\n';
  for (const auto& tree : model.stages) out << "tree " << format_tree(vocab, tree) << '\n';
}

inline std::string model_to_string(const BoostedModel& model) {
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

// Reads a model, declaring its schema into `vocab` (which may already hold
// the same declarations from a dataset).
inline BoostedModel read_model(std::istream& in, std::shared_ptr<Vocabulary> vocab) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || text::trim(line) != kModelHeader) {
    throw ModelError("missing '" + std::string(kModelHeader) + "' header");
  }
  BoostedModel model;
  model.vocab = vocab;
  std::string schema_text;
  std::vector<std::pair<std::size_t, std::string>> tree_lines;
  std::optional<std::string> target_name;
  auto& c = model.config;
  const auto fail = [&](const std::string& msg) -> ModelError {
    return ModelError("line " + std::to_string(lineno) + ": " + msg);
  };
  const auto real = [&](std::string_view v) {
    auto d = text::parse_double(v);
    if (!d || !std::isfinite(*d)) throw fail("bad number '" + std::string(v) + "'");
    return *d;
  };
  const auto integer = [&](std::string_view v) {
    auto d = text::parse_int<long long>(v);
    if (!d) throw fail("bad integer '" + std::string(v) + "'");
    return *d;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = text::trim(line);
    if (s.empty()) continue;
    const auto sp = s.find(' ');
    const auto key = s.substr(0, sp);
    const auto value = sp == std::string_view::npos ? std::string_view{} : text::trim(s.substr(sp));
    if (key == "type" || key == "pred") {
      schema_text.append(s).append("\n");
    } else if (key == "target") {
      target_name = std::string(value);
    } else if (key == "mask") {
      if (value == "none") {
        c.mask_predicate.reset();
      } else {
        c.mask_predicate = std::string(value);
      }
    } else if (key == "psi0") {
      model.psi0 = c.psi0 = real(value);
    } else if (key == "alpha") {
      c.cost.alpha = real(value);
    } else if (key == "beta") {
      c.cost.beta = real(value);
    } else if (key == "max_depth") {
      c.tree.max_depth = static_cast<int>(integer(value));
    } else if (key == "min_leaf") {
      c.tree.min_leaf_examples = static_cast<int>(integer(value));
    } else if (key == "max_literals") {
      c.tree.max_literals_per_node = static_cast<int>(integer(value));
    } else if (key == "const_cap") {
      c.tree.const_candidates_cap = static_cast<int>(integer(value));
    } else if (key == "n_stages") {
      c.n_stages = static_cast<int>(integer(value));
    } else if (key == "seed") {
      auto d = text::parse_int<std::uint64_t>(value);
      if (!d) throw fail("bad seed");
      c.seed = *d;
    } else if (key == "step") {
      c.step = real(value);
    } else if (key == "tree") {
      tree_lines.emplace_back(lineno, std::string(value));
    } else {
      throw fail("unknown key '" + std::string(key) + "'");
    }
  }
  std::istringstream schema_in(schema_text);
  try {
    parse_schema(schema_in, *vocab);
  } catch (const Error& e) {
    throw ModelError("embedded schema: " + e.message());
  }
  if (!target_name) throw ModelError("missing 'target' line");
  const auto target = vocab->find_predicate(*target_name);
  if (!target) throw ModelError("unknown target predicate '" + *target_name + "'");
  model.target = *target;
  try {
    detail::resolve_mask(*vocab, model.target, c.mask_predicate);
    c.validate();
  } catch (const Error& e) {
    throw ModelError(e.message());
  }
  for (const auto& [no, text_tree] : tree_lines) {
    try {
      model.stages.push_back(parse_tree(text_tree, *vocab, model.target));
    } catch (const ModelError& e) {
      throw ModelError("line " + std::to_string(no) + ": " + e.message());
    }
  }
  return model;
}

}  // namespace rfgb

#endif  // RFGB_BOOST_HPP_
