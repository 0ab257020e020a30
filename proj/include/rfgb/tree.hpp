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

// Relational regression trees.
//
// Internal nodes test a conjunction of literals with existential semantics:
// an example takes the true branch iff the conjunction of all true-branch
// ancestor tests plus this node's test has a grounding extending the
// example's target binding. Variables introduced by a test are visible to
// the tests below its true branch only. Leaves hold real values.
//
// The learner grows one tree greedily by reduction of the total squared
// deviation of the regression values, with leaf values set to the mean.

#ifndef RFGB_TREE_HPP_
#define RFGB_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rfgb/factstore.hpp"
#include "rfgb/modes.hpp"
#include "rfgb/parallel.hpp"

namespace rfgb {

struct TreeParams {
  int max_depth = 3;
  int min_leaf_examples = 8;
  int max_literals_per_node = 2;
  int const_candidates_cap = 16;

  void validate() const {
    if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
    if (min_leaf_examples < 1) throw ConfigError("min_leaf_examples must be >= 1");
    if (max_literals_per_node < 1) throw ConfigError("max_literals_per_node must be >= 1");
    if (const_candidates_cap < 0) throw ConfigError("const_candidates_cap must be >= 0");
  }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct RegressionExample {
  GroundAtom target;
  double value = 0;
};

struct TreeNode {
  std::vector<Literal> test;  // empty for leaves
  int true_child = -1;
  int false_child = -1;
  double value = 0;           // leaves only

  bool is_leaf() const { return test.empty(); }
};

// The optional leave-one-out mask: when set, the fact mask_pred(args) is
// hidden while evaluating the example whose target arguments are `args`.
inline FactMask example_mask(std::optional<PredId> mask_pred, std::span<const ConstId> args) {
  if (!mask_pred) return {};
  return FactMask{*mask_pred, std::vector<ConstId>(args.begin(), args.end())};
}

class RegressionTree {
 public:
  PredId target = 0;
  // Slots [0, arity) are the target's variables.
  std::vector<Variable> vars;
  // nodes[0] is the root.
  std::vector<TreeNode> nodes;

  double route(const FactBase& fb, std::span<const ConstId> target_args,
               const FactMask* mask = nullptr) const {
    Binding binding(vars.size(), kUnbound);
    std::copy(target_args.begin(), target_args.end(), binding.begin());
    std::vector<Literal> path;
    int at = 0;
    for (;;) {
      const TreeNode& node = nodes[at];
      if (node.is_leaf()) return node.value;
      const std::size_t base = path.size();
      path.insert(path.end(), node.test.begin(), node.test.end());
      if (satisfies(fb, path, binding, mask)) {
        at = node.true_child;
      } else {
        path.resize(base);
        at = node.false_child;
      }
    }
  }

  double route(const FactBase& fb, const GroundAtom& target_atom,
               std::optional<PredId> mask_pred = std::nullopt) const {
    if (target_atom.pred != target) throw ModelError("routed atom is not over the tree's target");
    const auto mask = example_mask(mask_pred, target_atom.args);
    return route(fb, target_atom.args, &mask);
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  int depth() const { return nodes.empty() ? 0 : depth_from(0); }

 private:
  int depth_from(int at) const {
    const auto& n = nodes[at];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.true_child), depth_from(n.false_child));
  }
};

// Names for the target's variables: the upper-cased initial of each type,
// with a suffix when two arguments share an initial.
inline std::vector<Variable> target_variables(const Vocabulary& vocab, PredId target) {
  std::vector<Variable> out;
  const auto& schema = vocab.predicate(target);
  for (std::size_t k = 0; k < schema.arity(); ++k) {
    const std::string& t = vocab.type_name(schema.arg_types[k]);
    std::string name(1, text::is_ident_start(t[0]) && t[0] != '_'
                            ? static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])))
                            : 'V');
    for (const auto& v : out) {
      if (v.name == name) {
        name += "T" + std::to_string(k);
        break;
      }
    }
    out.push_back({name, schema.arg_types[k]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Refinement operator

// The most frequent constants per (predicate, position) that some mode marks
// with `#`, capped at `cap` and listed in interned-id order. Frequency ties
// go to the smaller id.
class ConstantPool {
 public:
  ConstantPool() = default;

  ConstantPool(const FactBase& fb, const std::vector<ModeDecl>& modes, int cap) {
    for (const auto& m : modes) {
      for (std::size_t k = 0; k < m.args.size(); ++k) {
        if (m.args[k] != ArgMode::kConstant) continue;
        const auto key = std::make_pair(m.pred, k);
        if (top_.count(key)) continue;
        std::map<ConstId, std::size_t> freq;
        fb.for_each_row(m.pred, [&](std::span<const ConstId> row) { ++freq[row[k]]; });
        std::vector<std::pair<std::size_t, ConstId>> ranked;
        for (auto [c, n] : freq) ranked.emplace_back(n, c);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (ranked.size() > static_cast<std::size_t>(cap)) ranked.resize(cap);
        std::vector<ConstId> ids;
        for (const auto& r : ranked) ids.push_back(r.second);
        std::sort(ids.begin(), ids.end());
        top_[key] = std::move(ids);
      }
    }
  }

  const std::vector<ConstId>& top(PredId pred, std::size_t pos) const {
    static const std::vector<ConstId> kEmpty;
    auto it = top_.find({pred, pos});
    return it == top_.end() ? kEmpty : it->second;
  }

 private:
  std::map<std::pair<PredId, std::size_t>, std::vector<ConstId>> top_;
};

// A proposed node test. Fresh variables take slots starting at the current
// size of the tree's variable table, in order of first appearance.
struct Candidate {
  std::vector<Literal> literals;
  std::vector<TypeId> fresh_types;
};

namespace detail {

struct LiteralKey {
  std::string_view name;
  std::vector<std::pair<int, std::uint32_t>> pattern;  // (0, slot) for vars, (1, 0) for consts
  std::vector<ConstId> consts;

  auto operator<=>(const LiteralKey&) const = default;
  bool operator==(const LiteralKey&) const = default;
};

inline LiteralKey literal_key(const Vocabulary& vocab, const Literal& lit) {
  LiteralKey key{vocab.predicate(lit.pred).name, {}, {}};
  for (const auto& t : lit.terms) {
    if (t.is_var()) {
      key.pattern.emplace_back(0, t.id);
    } else {
      key.pattern.emplace_back(1, 0);
      key.consts.push_back(t.id);
    }
  }
  return key;
}

class Refiner {
 public:
  Refiner(const Vocabulary& vocab, const std::vector<ModeDecl>& modes, const ConstantPool& pool,
          const TreeParams& params)
      : vocab_(vocab), modes_(modes), pool_(pool), params_(params) {}

  std::vector<Candidate> propose(std::span<const Variable> vars, std::span<const std::uint32_t> scope,
                                 std::span<const Literal> path) const {
    std::vector<std::pair<std::uint32_t, TypeId>> typed_scope;
    for (auto s : scope) typed_scope.emplace_back(s, vars[s].type);
    std::vector<Candidate> out;
    Candidate prefix;
    extend(prefix, typed_scope, static_cast<std::uint32_t>(vars.size()), path, out);

    std::vector<std::vector<LiteralKey>> keys(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (const auto& lit : out[i].literals) keys[i].push_back(literal_key(vocab_, lit));
    }
    std::vector<std::size_t> order(out.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<Candidate> sorted;
    sorted.reserve(out.size());
    for (auto i : order) sorted.push_back(std::move(out[i]));
    return sorted;
  }

 private:
  using Scope = std::vector<std::pair<std::uint32_t, TypeId>>;

  void extend(const Candidate& prefix, const Scope& scope, std::uint32_t first_fresh,
              std::span<const Literal> path, std::vector<Candidate>& out) const {
    const std::uint32_t next_fresh = first_fresh + static_cast<std::uint32_t>(prefix.fresh_types.size());
    for (const auto& mode : modes_) {
      std::vector<std::pair<Literal, std::vector<TypeId>>> lits;
      Literal lit{mode.pred, {}, false};
      std::vector<TypeId> fresh;
      expand(mode, 0, scope, next_fresh, lit, fresh, lits);
      for (auto& [l, f] : lits) {
        if (!prefix.literals.empty() && !uses_slot_in(l, first_fresh, next_fresh)) continue;
        if (contains_literal(path, l) || contains_literal(prefix.literals, l)) continue;
        Candidate cand = prefix;
        cand.literals.push_back(l);
        cand.fresh_types.insert(cand.fresh_types.end(), f.begin(), f.end());
        const bool can_grow =
            static_cast<int>(cand.literals.size()) < params_.max_literals_per_node &&
            !cand.fresh_types.empty();
        if (can_grow) {
          Scope grown = scope;
          for (std::size_t i = prefix.fresh_types.size(); i < cand.fresh_types.size(); ++i) {
            grown.emplace_back(first_fresh + static_cast<std::uint32_t>(i), cand.fresh_types[i]);
          }
          out.push_back(cand);
          extend(cand, grown, first_fresh, path, out);
        } else {
          out.push_back(std::move(cand));
        }
      }
    }
  }

  // Enumerates every mode-legal argument pattern for `mode` from position k.
  void expand(const ModeDecl& mode, std::size_t k, const Scope& scope, std::uint32_t next_fresh,
              Literal& lit, std::vector<TypeId>& fresh,
              std::vector<std::pair<Literal, std::vector<TypeId>>>& out) const {
    const auto& schema = vocab_.predicate(mode.pred);
    if (k == mode.args.size()) {
      out.emplace_back(lit, fresh);
      return;
    }
    const TypeId type = schema.arg_types[k];
    auto recurse = [&](Term t) {
      lit.terms.push_back(t);
      expand(mode, k + 1, scope, next_fresh, lit, fresh, out);
      lit.terms.pop_back();
    };
    switch (mode.args[k]) {
      case ArgMode::kInput:
        for (const auto& [slot, t] : scope) {
          if (t == type) recurse(Term::var(slot));
        }
        break;
      case ArgMode::kOutput:
        for (const auto& [slot, t] : scope) {
          if (t == type) recurse(Term::var(slot));
        }
        fresh.push_back(type);
        recurse(Term::var(next_fresh + static_cast<std::uint32_t>(fresh.size()) - 1));
        fresh.pop_back();
        break;
      case ArgMode::kConstant:
        for (ConstId c : pool_.top(mode.pred, k)) recurse(Term::constant(c));
        break;
    }
  }

  static bool uses_slot_in(const Literal& lit, std::uint32_t lo, std::uint32_t hi) {
    return std::any_of(lit.terms.begin(), lit.terms.end(),
                       [&](const Term& t) { return t.is_var() && t.id >= lo && t.id < hi; });
  }

  static bool contains_literal(std::span<const Literal> lits, const Literal& l) {
    return std::find(lits.begin(), lits.end(), l) != lits.end();
  }

  const Vocabulary& vocab_;
  const std::vector<ModeDecl>& modes_;
  const ConstantPool& pool_;
  const TreeParams& params_;
};

}  // namespace detail

// All mode-legal tests at a node whose in-scope variables are `scope` (slots
// into `vars`) under the true-branch path conjunction `path`. Conjunctions of
// up to max_literals_per_node literals are chained: each later literal must
// use a variable introduced earlier in the same test.
inline std::vector<Candidate> propose_splits(const Vocabulary& vocab, std::span<const Variable> vars,
                                             std::span<const std::uint32_t> scope,
                                             std::span<const Literal> path,
                                             const std::vector<ModeDecl>& modes,
                                             const ConstantPool& pool, const TreeParams& params) {
  return detail::Refiner(vocab, modes, pool, params).propose(vars, scope, path);
}

// ---------------------------------------------------------------------------
// Learning

struct LearnOptions {
  std::optional<PredId> mask_pred;
  unsigned workers = 0;  // 0: worker_count()
  const ConstantPool* pool = nullptr;  // built from the fact base when null
};

namespace detail {

// Sum of squared deviations from the mean, two-pass, in index order.
inline double squared_deviation(std::span<const double> values, std::span<const std::uint32_t> idx) {
  if (idx.empty()) return 0;
  double sum = 0;
  for (auto i : idx) sum += values[i];
  const double mean = sum / static_cast<double>(idx.size());
  double sse = 0;
  for (auto i : idx) sse += (values[i] - mean) * (values[i] - mean);
  return sse;
}

inline double mean_of(std::span<const double> values, std::span<const std::uint32_t> idx) {
  double sum = 0;
  for (auto i : idx) sum += values[i];
  return sum / static_cast<double>(idx.size());
}

// Smallest reduction accepted as an improvement, relative to the parent's
// score. Guards against splitting on rounding noise.
inline double min_gain(double parent_sse) { return 1e-12 * std::max(1.0, parent_sse); }

class TreeLearner {
 public:
  TreeLearner(std::span<const RegressionExample> examples, const FactBase& fb,
              const std::vector<ModeDecl>& modes, const TreeParams& params,
              const LearnOptions& options, const ConstantPool& pool)
      : examples_(examples),
        fb_(fb),
        params_(params),
        options_(options),
        refiner_(fb.vocab(), modes, pool, params),
        workers_(options.workers ? options.workers : worker_count()) {
    values_.reserve(examples.size());
    masks_.reserve(examples.size());
    for (const auto& ex : examples) {
      values_.push_back(ex.value);
      masks_.push_back(example_mask(options.mask_pred, ex.target.args));
    }
  }

  RegressionTree learn() {
    tree_.target = examples_[0].target.pred;
    tree_.vars = target_variables(fb_.vocab(), tree_.target);
    std::vector<std::uint32_t> idx(examples_.size());
    for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<std::uint32_t> scope;
    for (std::uint32_t s = 0; s < tree_.vars.size(); ++s) scope.push_back(s);
    build(idx, 0, scope, {});
    return std::move(tree_);
  }

 private:
  struct Score {
    double reduction = 0;
    std::vector<char> goes_true;
  };

  int add_leaf(double value) {
    tree_.nodes.push_back(TreeNode{{}, -1, -1, value});
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  int build(const std::vector<std::uint32_t>& idx, int depth, std::vector<std::uint32_t> scope,
            std::vector<Literal> path) {
    const double mean = mean_of(values_, idx);
    if (depth >= params_.max_depth || static_cast<int>(idx.size()) < params_.min_leaf_examples) {
      return add_leaf(mean);
    }
    const double parent = squared_deviation(values_, idx);
    const auto candidates = refiner_.propose(tree_.vars, scope, path);
    if (candidates.empty()) return add_leaf(mean);

    std::vector<double> reduction(candidates.size(), 0);
    std::vector<Binding> bindings(workers_);
    std::vector<std::vector<Literal>> conj(workers_);
    std::vector<std::vector<std::uint32_t>> t_idx(workers_), f_idx(workers_);
    std::vector<Memo> memos(workers_);
    parallel_for(
        candidates.size(),
        [&](std::size_t c, unsigned w) {
          const auto& cand = candidates[c];
          auto& lits = conj[w];
          connected_path(path, cand.literals, lits);
          lits.insert(lits.end(), cand.literals.begin(), cand.literals.end());
          auto& b = bindings[w];
          b.assign(tree_.vars.size() + cand.fresh_types.size(), kUnbound);
          partition(lits, b, idx, memos[w], t_idx[w], f_idx[w]);
          reduction[c] = parent - (squared_deviation(values_, t_idx[w]) +
                                   squared_deviation(values_, f_idx[w]));
        },
        workers_);

    // Gains within `eps` of each other count as tied; ties go to the
    // earlier candidate.
    const double eps = min_gain(parent);
    std::size_t best = candidates.size();
    double best_gain = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (reduction[c] <= eps) continue;
      if (best == candidates.size() || reduction[c] > best_gain + eps) {
        best_gain = reduction[c];
        best = c;
      }
    }
    if (best == candidates.size()) return add_leaf(mean);

    const Candidate& chosen = candidates[best];
    const auto first_fresh = static_cast<std::uint32_t>(tree_.vars.size());
    for (TypeId t : chosen.fresh_types) tree_.vars.push_back({fresh_name(t), t});

    std::vector<Literal> true_path = path;
    true_path.insert(true_path.end(), chosen.literals.begin(), chosen.literals.end());
    std::vector<std::uint32_t> true_idx, false_idx;
    Binding b(tree_.vars.size(), kUnbound);
    partition(true_path, b, idx, memos[0], true_idx, false_idx);

    const int at = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{chosen.literals, -1, -1, 0});
    std::vector<std::uint32_t> true_scope = scope;
    for (std::uint32_t s = first_fresh; s < tree_.vars.size(); ++s) true_scope.push_back(s);
    const int t = build(true_idx, depth + 1, std::move(true_scope), std::move(true_path));
    const int f = build(false_idx, depth + 1, std::move(scope), std::move(path));
    tree_.nodes[at].true_child = t;
    tree_.nodes[at].false_child = f;
    return at;
  }

  // Every example at a node satisfies `path`. Path literals that share no
  // existential variable with `test`, directly or through other path
  // literals, are satisfied independently and can be dropped.
  void connected_path(std::span<const Literal> path, std::span<const Literal> test,
                      std::vector<Literal>& out) const {
    out.clear();
    const std::uint32_t n_target = static_cast<std::uint32_t>(examples_[0].target.args.size());
    std::vector<std::uint32_t> reach;
    const auto note = [&](const Literal& l) {
      for (const auto& t : l.terms) {
        if (t.is_var() && t.id >= n_target &&
            std::find(reach.begin(), reach.end(), t.id) == reach.end()) {
          reach.push_back(t.id);
        }
      }
    };
    const auto touches = [&](const Literal& l) {
      return std::any_of(l.terms.begin(), l.terms.end(), [&](const Term& t) {
        return t.is_var() && std::find(reach.begin(), reach.end(), t.id) != reach.end();
      });
    };
    for (const auto& l : test) note(l);
    std::vector<char> keep(path.size(), 0);
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t k = 0; k < path.size(); ++k) {
        if (!keep[k] && touches(path[k])) {
          keep[k] = 1;
          note(path[k]);
          grew = true;
        }
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (keep[k]) out.push_back(path[k]);
    }
  }

  // Results keyed by the target arguments a conjunction actually reads.
  // Examples sharing those arguments (e.g. the same user) share a result.
  using Memo = std::unordered_map<std::uint64_t, bool>;

  void partition(std::span<const Literal> lits, Binding& b, const std::vector<std::uint32_t>& idx,
                 Memo& memo, std::vector<std::uint32_t>& ti, std::vector<std::uint32_t>& fi) const {
    ti.clear();
    fi.clear();
    const std::size_t n_target = examples_[0].target.args.size();
    std::vector<std::uint32_t> used;
    bool masked = false;
    for (const auto& lit : lits) {
      masked |= options_.mask_pred && lit.pred == *options_.mask_pred;
      for (const auto& t : lit.terms) {
        if (t.is_var() && t.id < n_target &&
            std::find(used.begin(), used.end(), t.id) == used.end()) {
          used.push_back(t.id);
        }
      }
    }
    if (masked) {
      used.clear();
      for (std::uint32_t k = 0; k < n_target; ++k) used.push_back(k);
    }
    if (used.size() > 2) {
      for (auto i : idx) (evaluate(lits, b, i) ? ti : fi).push_back(i);
      return;
    }
    memo.clear();
    for (auto i : idx) {
      const auto& args = examples_[i].target.args;
      std::uint64_t key = 0;
      for (auto slot : used) key = (key << 32) | args[slot];
      auto [it, fresh] = memo.try_emplace(key, false);
      if (fresh) it->second = evaluate(lits, b, i);
      (it->second ? ti : fi).push_back(i);
    }
  }

  bool evaluate(std::span<const Literal> lits, Binding& b, std::uint32_t i) const {
    const auto& args = examples_[i].target.args;
    std::copy(args.begin(), args.end(), b.begin());
    return satisfies(fb_, lits, b, &masks_[i]);
  }

  std::string fresh_name(TypeId t) {
    const std::string& type = fb_.vocab().type_name(t);
    const char initial = type[0] != '_' ? static_cast<char>(std::toupper(static_cast<unsigned char>(type[0])))
                                        : 'V';
    return std::string(1, initial) + std::to_string(++fresh_counts_[initial]);
  }

  std::span<const RegressionExample> examples_;
  const FactBase& fb_;
  const TreeParams& params_;
  const LearnOptions& options_;
  Refiner refiner_;
  unsigned workers_;
  std::vector<double> values_;
  std::vector<FactMask> masks_;
  std::map<char, int> fresh_counts_;
  RegressionTree tree_;
};

}  // namespace detail

// Fits one relational regression tree to `examples`. `fb` must be frozen.
inline RegressionTree learn_tree(std::span<const RegressionExample> examples, const FactBase& fb,
                                 const std::vector<ModeDecl>& modes, const TreeParams& params,
                                 const LearnOptions& options = {}) {
  params.validate();
  if (examples.empty()) throw TrainingError("cannot learn a tree from zero examples");
  if (!fb.frozen()) throw TrainingError("fact base must be frozen before training");
  const PredId target = examples[0].target.pred;
  for (const auto& ex : examples) {
    if (ex.target.pred != target) throw TrainingError("examples mix target predicates");
    check_atom(fb.vocab(), ex.target);
    if (!std::isfinite(ex.value)) throw TrainingError("non-finite regression value");
  }
  check_modes(fb.vocab(), modes, target);
  std::optional<ConstantPool> own_pool;
  const ConstantPool* pool = options.pool;
  if (!pool) pool = &own_pool.emplace(fb, modes, params.const_candidates_cap);
  return detail::TreeLearner(examples, fb, modes, params, options, *pool).learn();
}

// ---------------------------------------------------------------------------
// Text form: parenthesized preorder,
//   (leaf <value>)
//   (node <literal>[, <literal>...] <true-subtree> <false-subtree>)
// Variables start with an upper-case letter; constants that do are quoted.

namespace detail {

inline void format_term(std::string& out, const Vocabulary& vocab, const std::vector<Variable>& vars,
                        const Term& t) {
  if (t.is_var()) {
    out += vars.at(t.id).name;
    return;
  }
  const std::string& sym = vocab.symbol(t.id);
  if (text::is_upper(sym[0])) {
    out += '\'';
    out += sym;
    out += '\'';
  } else {
    out += sym;
  }
}

inline void format_node(std::string& out, const Vocabulary& vocab, const RegressionTree& tree,
                        int at) {
  const TreeNode& n = tree.nodes.at(at);
  if (n.is_leaf()) {
    out += "(leaf " + text::format_double(n.value) + ")";
    return;
  }
  out += "(node ";
  for (std::size_t i = 0; i < n.test.size(); ++i) {
    const Literal& lit = n.test[i];
    if (i) out += ", ";
    if (lit.negated) out += "\\+";
    out += vocab.predicate(lit.pred).name;
    out += '(';
    for (std::size_t k = 0; k < lit.terms.size(); ++k) {
      if (k) out += ',';
      format_term(out, vocab, tree.vars, lit.terms[k]);
    }
    out += ')';
  }
  out += ' ';
  format_node(out, vocab, tree, n.true_child);
  out += ' ';
  format_node(out, vocab, tree, n.false_child);
  out += ')';
}

class TreeParser {
 public:
  TreeParser(std::string_view s, Vocabulary& vocab, RegressionTree& tree)
      : s_(s), vocab_(vocab), tree_(tree) {
    for (std::uint32_t i = 0; i < tree.vars.size(); ++i) slots_[tree.vars[i].name] = i;
  }

  void parse() {
    parse_node();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters after tree");
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ModelError(msg + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && text::is_space(s_[pos_])) ++pos_;
  }

  bool consume(std::string_view token) {
    skip_ws();
    if (s_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  std::string_view word() {
    skip_ws();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && !text::is_space(s_[pos_]) && s_[pos_] != ')' && s_[pos_] != '(' &&
           s_[pos_] != ',') {
      ++pos_;
    }
    return s_.substr(b, pos_ - b);
  }

  int parse_node() {
    if (!consume("(")) fail("expected '('");
    const int at = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto kind = word();
    if (kind == "leaf") {
      const auto v = text::parse_double(word());
      if (!v || !std::isfinite(*v)) fail("bad leaf value");
      tree_.nodes[at].value = *v;
    } else if (kind == "node") {
      std::vector<Literal> test;
      do {
        test.push_back(parse_literal());
      } while (consume(","));
      tree_.nodes[at].test = std::move(test);
      const int t = parse_node();
      const int f = parse_node();
      tree_.nodes[at].true_child = t;
      tree_.nodes[at].false_child = f;
    } else {
      fail("expected 'leaf' or 'node'");
    }
    if (!consume(")")) fail("expected ')'");
    return at;
  }

  Literal parse_literal() {
    Literal lit;
    lit.negated = consume("\\+");
    skip_ws();
    text::AtomText atom;
    const auto used = text::parse_atom_prefix(s_.substr(pos_), atom);
    if (!used) fail("malformed literal");
    pos_ += *used;
    const auto pred = vocab_.find_predicate(atom.name);
    if (!pred) fail("unknown predicate '" + atom.name + "'");
    lit.pred = *pred;
    const auto& schema = vocab_.predicate(*pred);
    if (atom.args.size() != schema.arity()) fail("wrong arity for '" + atom.name + "'");
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
      const std::string& a = atom.args[k];
      const TypeId type = schema.arg_types[k];
      if (a.size() >= 2 && a.front() == '\'' && a.back() == '\'') {
        lit.terms.push_back(Term::constant(intern(a.substr(1, a.size() - 2), type)));
      } else if (text::is_upper(a[0])) {
        if (!text::is_identifier(a)) fail("bad variable name '" + a + "'");
        auto it = slots_.find(a);
        if (it == slots_.end()) {
          const auto slot = static_cast<std::uint32_t>(tree_.vars.size());
          tree_.vars.push_back({a, type});
          it = slots_.emplace(a, slot).first;
        } else if (tree_.vars[it->second].type != type) {
          fail("variable '" + a + "' used with two types");
        }
        lit.terms.push_back(Term::var(it->second));
      } else {
        lit.terms.push_back(Term::constant(intern(a, type)));
      }
    }
    return lit;
  }

  ConstId intern(const std::string& sym, TypeId type) {
    try {
      return vocab_.intern(sym, type);
    } catch (const SchemaError& e) {
      fail(e.message());
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  Vocabulary& vocab_;
  RegressionTree& tree_;
  std::map<std::string, std::uint32_t, std::less<>> slots_;
};

}  // namespace detail

inline std::string format_tree(const Vocabulary& vocab, const RegressionTree& tree) {
  std::string out;
  detail::format_node(out, vocab, tree, 0);
  return out;
}

// Parses the text form. Constants not yet in `vocab` are interned with the
// type their position declares.
inline RegressionTree parse_tree(std::string_view s, Vocabulary& vocab, PredId target) {
  RegressionTree tree;
  tree.target = target;
  tree.vars = target_variables(vocab, target);
  detail::TreeParser(s, vocab, tree).parse();
  Clause check{tree.vars, {}};
  for (const auto& n : tree.nodes) check.literals.insert(check.literals.end(), n.test.begin(), n.test.end());
  try {
    check_clause(vocab, check);
  } catch (const ClauseError& e) {
    throw ModelError(e.message());
  }
  return tree;
}

}  // namespace rfgb

#endif  // RFGB_TREE_HPP_
