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

#include "rfgb/tree.hpp"

#include <map>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace rfgb {
namespace {

// t(X) over entities a..d, with p(a), p(b).
struct UnaryCase {
  std::shared_ptr<Vocabulary> vocab = std::make_shared<Vocabulary>();
  std::unique_ptr<FactBase> fb;
  std::vector<RegressionExample> examples;
  std::vector<ModeDecl> modes;

  explicit UnaryCase(std::vector<double> values) {
    vocab->declare_predicate("t", {"e"});
    vocab->declare_predicate("p", {"e"});
    fb = std::make_unique<FactBase>(vocab);
    fb->add_fact("p", {"a"});
    fb->add_fact("p", {"b"});
    const char* names[] = {"a", "b", "c", "d"};
    for (std::size_t i = 0; i < values.size(); ++i) {
      examples.push_back({make_atom(*vocab, "t", {names[i % 4]}), values[i]});
    }
    fb->freeze();
    modes.push_back({vocab->predicate_id("p"), {ArgMode::kInput}});
  }
};

TreeParams Params(int depth, int min_leaf) {
  TreeParams p;
  p.max_depth = depth;
  p.min_leaf_examples = min_leaf;
  return p;
}

TEST(LearnTreeTest, ConstantValuesGiveSingleLeaf) {
  UnaryCase c({0.5, 0.5, 0.5, 0.5});
  const auto tree = learn_tree(c.examples, *c.fb, c.modes, Params(3, 1));
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(tree.nodes[0].value, 0.5);
}

TEST(LearnTreeTest, DepthZeroGivesMeanLeaf) {
  UnaryCase c({0.9, 0.8, -0.7, -0.6});
  const auto tree = learn_tree(c.examples, *c.fb, c.modes, Params(0, 1));
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_NEAR(tree.nodes[0].value, 0.1, 1e-15);
}

TEST(LearnTreeTest, FourExampleSplit) {
  // The only mode-legal test is p(X); it reduces the squared deviation from
  // 2.26 to 0.01, so the tree splits once with leaf means 0.85 and -0.65.
  UnaryCase c({0.9, 0.8, -0.7, -0.6});
  const auto tree = learn_tree(c.examples, *c.fb, c.modes, Params(1, 1));
  ASSERT_EQ(tree.nodes.size(), 3u);
  const auto& root = tree.nodes[0];
  ASSERT_FALSE(root.is_leaf());
  ASSERT_EQ(root.test.size(), 1u);
  EXPECT_EQ(root.test[0].pred, c.vocab->predicate_id("p"));
  EXPECT_EQ(root.test[0].terms[0], Term::var(0));
  EXPECT_NEAR(tree.nodes[root.true_child].value, 0.85, 1e-12);
  EXPECT_NEAR(tree.nodes[root.false_child].value, -0.65, 1e-12);
}

TEST(LearnTreeTest, MinLeafStopsSplitting) {
  UnaryCase c({0.9, 0.8, -0.7, -0.6});
  const auto tree = learn_tree(c.examples, *c.fb, c.modes, Params(3, 8));
  EXPECT_EQ(tree.nodes.size(), 1u);
}

TEST(LearnTreeTest, Errors) {
  UnaryCase c({0.1});
  EXPECT_THROW(learn_tree({}, *c.fb, c.modes, Params(1, 1)), TrainingError);
  std::vector<ModeDecl> bad = {{999, {ArgMode::kInput}}};
  EXPECT_THROW(learn_tree(c.examples, *c.fb, bad, Params(1, 1)), SchemaError);
  std::vector<ModeDecl> on_target = {{c.vocab->predicate_id("t"), {ArgMode::kInput}}};
  EXPECT_THROW(learn_tree(c.examples, *c.fb, on_target, Params(1, 1)), SchemaError);
  EXPECT_THROW(learn_tree(c.examples, *c.fb, c.modes, Params(-1, 1)), ConfigError);
}

// match(U,J) with q(user, thing).
struct RouteCase {
  std::shared_ptr<Vocabulary> vocab = std::make_shared<Vocabulary>();
  std::unique_ptr<FactBase> fb;
  RegressionTree tree;

  RouteCase() {
    vocab->declare_predicate("match", {"user", "job"});
    vocab->declare_predicate("q", {"user", "thing"});
    fb = std::make_unique<FactBase>(vocab);
    fb->add_fact("q", {"u1", "x"});
    vocab->intern("u2", vocab->type_id("user"));
    vocab->intern("j1", vocab->type_id("job"));
    fb->freeze();
    tree = parse_tree("(node q(U,Y) (leaf 1) (leaf -1))", *vocab, vocab->predicate_id("match"));
  }
};

TEST(RouteTest, LeafOnlyTree) {
  RouteCase c;
  auto leaf = parse_tree("(leaf 0.3)", *c.vocab, c.vocab->predicate_id("match"));
  EXPECT_EQ(leaf.route(*c.fb, make_atom(*c.vocab, "match", {"u1", "j1"})), 0.3);
}

TEST(RouteTest, ExistentialWitness) {
  RouteCase c;
  EXPECT_EQ(c.tree.route(*c.fb, make_atom(*c.vocab, "match", {"u1", "j1"})), 1.0);
  EXPECT_EQ(c.tree.route(*c.fb, make_atom(*c.vocab, "match", {"u2", "j1"})), -1.0);
}

TEST(RouteTest, PathConjunctionKeepsSharedVariablesCoherent) {
  // q(U,Y) holds via Y=x and r(Y) holds only for y, so the second test on
  // the true branch must fail: Y is the same variable along the path.
  auto vocab = std::make_shared<Vocabulary>();
  vocab->declare_predicate("match", {"user", "job"});
  vocab->declare_predicate("q", {"user", "thing"});
  vocab->declare_predicate("r", {"thing"});
  FactBase fb(vocab);
  fb.add_fact("q", {"u1", "x"});
  fb.add_fact("r", {"y"});
  vocab->intern("j1", vocab->type_id("job"));
  fb.freeze();
  const auto tree = parse_tree("(node q(U,T1) (node r(T1) (leaf 2) (leaf 1)) (leaf 0))", *vocab,
                               vocab->predicate_id("match"));
  EXPECT_EQ(tree.route(fb, make_atom(*vocab, "match", {"u1", "j1"})), 1.0);
}

// --- propose_splits --------------------------------------------------------

struct RecModes {
  std::shared_ptr<Vocabulary> vocab = std::make_shared<Vocabulary>();
  std::unique_ptr<FactBase> fb;

  RecModes() {
    vocab->declare_predicate("match", {"user", "job"});
    vocab->declare_predicate("userSkill", {"user", "skill"});
    vocab->declare_predicate("jobSkill", {"job", "skill"});
    vocab->declare_predicate("userJobDis", {"user", "job", "distbucket"});
    fb = std::make_unique<FactBase>(vocab);
    for (int b = 1; b <= 4; ++b) {
      fb->add_fact("userJobDis", {"u" + std::to_string(b), "j1", std::to_string(b)});
    }
    fb->freeze();
  }

  std::vector<ModeDecl> modes(const std::string& text) const {
    std::istringstream in(text);
    return parse_modes(in, *vocab);
  }

  std::vector<Variable> vars(bool with_job) const {
    auto v = target_variables(*vocab, vocab->predicate_id("match"));
    if (!with_job) v.pop_back();
    return v;
  }
};

std::vector<Candidate> Propose(const RecModes& r, const std::vector<ModeDecl>& modes,
                               std::vector<std::uint32_t> scope, int max_literals = 1) {
  TreeParams params;
  params.max_literals_per_node = max_literals;
  const auto vars = r.vars(true);
  ConstantPool pool(*r.fb, modes, params.const_candidates_cap);
  return propose_splits(*r.vocab, vars, scope, {}, modes, pool, params);
}

TEST(ProposeSplitsTest, OutputModeIntroducesFreshVariable) {
  RecModes r;
  const auto c = Propose(r, r.modes("mode userSkill(+user, -skill)."), {0});
  ASSERT_EQ(c.size(), 1u);
  ASSERT_EQ(c[0].literals.size(), 1u);
  EXPECT_EQ(c[0].literals[0].terms[0], Term::var(0));
  EXPECT_EQ(c[0].literals[0].terms[1], Term::var(2));  // first fresh slot
  EXPECT_EQ(c[0].fresh_types, std::vector<TypeId>{r.vocab->type_id("skill")});
}

TEST(ProposeSplitsTest, InputModeNeedsBoundVariable) {
  RecModes r;
  const auto modes = r.modes("mode jobSkill(+job, -skill).");
  EXPECT_TRUE(Propose(r, modes, {0}).empty());
  const auto c = Propose(r, modes, {0, 1});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].literals[0].terms[0], Term::var(1));
}

TEST(ProposeSplitsTest, ConstantModeEnumeratesBuckets) {
  RecModes r;
  const auto c = Propose(r, r.modes("mode userJobDis(+user, +job, #distbucket)."), {0, 1});
  ASSERT_EQ(c.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.vocab->symbol(c[i].literals[0].terms[2].id), std::to_string(i + 1));
  }
}

TEST(ProposeSplitsTest, ConjunctionsChainThroughFreshVariables) {
  RecModes r;
  const auto modes = r.modes("mode userSkill(+user, -skill).\nmode jobSkill(+job, -skill).");
  const auto c = Propose(r, modes, {0, 1}, 2);
  // Singles: jobSkill(J,S), userSkill(U,S). Pairs: each followed by the other
  // literal reusing S, or by its sibling with a fresh variable only when it
  // consumes S.
  bool found_shared = false;
  for (const auto& cand : c) {
    if (cand.literals.size() == 2) {
      const auto& second = cand.literals[1];
      bool uses_first_fresh = false;
      for (const auto& t : second.terms) uses_first_fresh |= t.is_var() && t.id == 2;
      EXPECT_TRUE(uses_first_fresh);
      if (second.terms[1] == Term::var(2)) found_shared = true;
    }
  }
  EXPECT_TRUE(found_shared);
  // Deterministic order: predicate name first.
  EXPECT_EQ(r.vocab->predicate(c.front().literals[0].pred).name, "jobSkill");
}

TEST(ProposeSplitsTest, ConstantCapKeepsMostFrequent) {
  auto vocab = std::make_shared<Vocabulary>();
  vocab->declare_predicate("match", {"user", "job"});
  vocab->declare_predicate("userCity", {"user", "city"});
  FactBase fb(vocab);
  // c0 x1, c1 x3, c2 x2, c3 x3
  const std::map<std::string, int> counts = {{"c0", 1}, {"c1", 3}, {"c2", 2}, {"c3", 3}};
  int u = 0;
  for (const auto& [city, n] : counts) {
    for (int i = 0; i < n; ++i) fb.add_fact("userCity", {"u" + std::to_string(u++), city});
  }
  fb.freeze();
  std::istringstream in("mode userCity(+user, #city).");
  const auto modes = parse_modes(in, *vocab);
  ConstantPool pool(fb, modes, 2);
  const auto& top = pool.top(vocab->predicate_id("userCity"), 1);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(vocab->symbol(top[0]), "c1");
  EXPECT_EQ(vocab->symbol(top[1]), "c3");
}

// --- Properties --------------------------------------------------------------

TEST(LearnTreePropertyTest, PropositionalSplitMatchesExhaustiveSearch) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    auto pc = oracle::make_propositional_case(rng);
    const auto tree = learn_tree(pc.examples, *pc.fb, pc.modes, Params(1, 1));
    const int expected = oracle::best_propositional_split(pc);
    if (expected < 0) {
      EXPECT_EQ(tree.nodes.size(), 1u);
    } else {
      ASSERT_EQ(tree.nodes.size(), 3u);
      EXPECT_EQ(pc.vocab->predicate(tree.nodes[0].test[0].pred).name, pc.pred_names[expected]);
    }
  }
}

// Random relational data for the remaining properties: users with skills,
// jobs with skills, values correlated with skill overlap.
struct RelationalCase {
  std::shared_ptr<Vocabulary> vocab = std::make_shared<Vocabulary>();
  std::unique_ptr<FactBase> fb;
  std::vector<RegressionExample> examples;
  std::vector<ModeDecl> modes;

  explicit RelationalCase(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    vocab->declare_predicate("match", {"user", "job"});
    vocab->declare_predicate("userSkill", {"user", "skill"});
    vocab->declare_predicate("jobSkill", {"job", "skill"});
    vocab->declare_predicate("userCity", {"user", "city"});
    fb = std::make_unique<FactBase>(vocab);
    for (int u = 0; u < 12; ++u) {
      for (int k = 0; k < 2; ++k) {
        fb->add_fact("userSkill", {"u" + std::to_string(u), "s" + std::to_string(rng() % 6)});
      }
      fb->add_fact("userCity", {"u" + std::to_string(u), "c" + std::to_string(rng() % 3)});
    }
    for (int j = 0; j < 8; ++j) {
      fb->add_fact("jobSkill", {"j" + std::to_string(j), "s" + std::to_string(rng() % 6)});
    }
    fb->freeze();
    for (int i = 0; i < 40; ++i) {
      auto atom = make_atom(*vocab, "match",
                            {"u" + std::to_string(rng() % 12), "j" + std::to_string(rng() % 8)});
      examples.push_back({atom, (static_cast<int>(rng() % 200) - 100) / 100.0});
    }
    std::istringstream in(
        "mode userSkill(+user, -skill).\nmode jobSkill(+job, -skill).\n"
        "mode userCity(+user, #city).\n");
    modes = parse_modes(in, *vocab);
  }
};

TEST(LearnTreePropertyTest, LeavesHoldMeanOfCoRoutedExamples) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RelationalCase c(seed);
    const auto tree = learn_tree(c.examples, *c.fb, c.modes, Params(3, 2));
    std::map<double, std::vector<double>> by_leaf;
    std::vector<double> routed;
    for (const auto& ex : c.examples) {
      routed.push_back(tree.route(*c.fb, ex.target));
    }
    // Group by reached leaf value and compare with the group mean.
    for (std::size_t i = 0; i < routed.size(); ++i) by_leaf[routed[i]].push_back(c.examples[i].value);
    for (const auto& [leaf, vals] : by_leaf) {
      double s = 0;
      for (double v : vals) s += v;
      EXPECT_NEAR(leaf, s / vals.size(), 1e-12);
    }
  }
}

TEST(LearnTreePropertyTest, SplitsNeverIncreaseSquaredDeviation) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RelationalCase c(seed);
    const auto tree = learn_tree(c.examples, *c.fb, c.modes, Params(3, 2));
    // Recompute per-node example sets through routing prefixes.
    std::function<void(int, std::vector<std::size_t>, std::vector<Literal>)> check =
        [&](int at, std::vector<std::size_t> idx, std::vector<Literal> path) {
          const auto& n = tree.nodes[at];
          if (n.is_leaf()) return;
          auto sse = [&](const std::vector<std::size_t>& ids) {
            std::vector<long double> v;
            for (auto i : ids) v.push_back(c.examples[i].value);
            return oracle::sse_of(v);
          };
          auto true_path = path;
          true_path.insert(true_path.end(), n.test.begin(), n.test.end());
          std::vector<std::size_t> t, f;
          for (auto i : idx) {
            Binding b(tree.vars.size(), kUnbound);
            b[0] = c.examples[i].target.args[0];
            b[1] = c.examples[i].target.args[1];
            (satisfies(*c.fb, true_path, b) ? t : f).push_back(i);
          }
          EXPECT_LE(sse(t) + sse(f), sse(idx) + 1e-12);
          check(n.true_child, t, true_path);
          check(n.false_child, f, path);
        };
    std::vector<std::size_t> all(c.examples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    check(0, all, {});
  }
}

TEST(LearnTreePropertyTest, DeterministicAndRoundTripsThroughText) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RelationalCase c(seed);
    const auto a = learn_tree(c.examples, *c.fb, c.modes, Params(3, 2));
    const auto b = learn_tree(c.examples, *c.fb, c.modes, Params(3, 2));
    const auto text_a = format_tree(*c.vocab, a);
    EXPECT_EQ(text_a, format_tree(*c.vocab, b));
    const auto parsed = parse_tree(text_a, *c.vocab, c.vocab->predicate_id("match"));
    EXPECT_EQ(format_tree(*c.vocab, parsed), text_a);
    for (const auto& ex : c.examples) {
      EXPECT_EQ(parsed.route(*c.fb, ex.target), a.route(*c.fb, ex.target));
    }
  }
}

TEST(LearnTreePropertyTest, ParallelEvaluationMatchesSerial) {
  RelationalCase c(3);
  LearnOptions serial, threaded;
  serial.workers = 1;
  threaded.workers = 4;
  EXPECT_EQ(format_tree(*c.vocab, learn_tree(c.examples, *c.fb, c.modes, Params(3, 2), serial)),
            format_tree(*c.vocab, learn_tree(c.examples, *c.fb, c.modes, Params(3, 2), threaded)));
}

TEST(ParseTreeTest, RejectsMalformedText) {
  RouteCase c;
  const PredId m = c.vocab->predicate_id("match");
  EXPECT_THROW(parse_tree("(leaf x)", *c.vocab, m), ModelError);
  EXPECT_THROW(parse_tree("(node nosuch(U) (leaf 1) (leaf 2))", *c.vocab, m), ModelError);
  EXPECT_THROW(parse_tree("(node q(U) (leaf 1) (leaf 2))", *c.vocab, m), ModelError);
  EXPECT_THROW(parse_tree("(leaf 1) junk", *c.vocab, m), ModelError);
}

}  // namespace
}  // namespace rfgb
