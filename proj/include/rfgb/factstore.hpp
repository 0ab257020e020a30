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

// Typed first-order fact store.
//
// A Vocabulary holds entity types, predicate signatures and interned
// constants. A FactBase holds ground atoms over a vocabulary and, once
// frozen, per-(predicate, argument position) indexes used to answer
// existential conjunctive queries (`satisfies`).
//
// Several fact bases (train/test) and models may share one vocabulary so
// that constant ids agree between them.

#ifndef RFGB_FACTSTORE_HPP_
#define RFGB_FACTSTORE_HPP_

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rfgb/error.hpp"
#include "rfgb/text.hpp"

namespace rfgb {

using TypeId = std::uint32_t;
using PredId = std::uint32_t;
using ConstId = std::uint32_t;

inline constexpr ConstId kUnbound = std::numeric_limits<ConstId>::max();
inline constexpr std::size_t kMaxArity = 16;

struct PredicateSchema {
  std::string name;
  std::vector<TypeId> arg_types;

  std::size_t arity() const { return arg_types.size(); }
};

class Vocabulary {
 public:
  // Idempotent.
  TypeId declare_type(std::string_view name) {
    if (!text::is_identifier(name)) {
      throw SchemaError("invalid type name '" + std::string(name) + "'");
    }
    const std::string key(name);
    if (auto it = type_ids_.find(key); it != type_ids_.end()) return it->second;
    const auto id = static_cast<TypeId>(type_names_.size());
    type_names_.push_back(key);
    type_ids_.emplace(key, id);
    return id;
  }

  std::optional<TypeId> find_type(std::string_view name) const {
    auto it = type_ids_.find(std::string(name));
    if (it == type_ids_.end()) return std::nullopt;
    return it->second;
  }

  TypeId type_id(std::string_view name) const {
    auto t = find_type(name);
    if (!t) throw SchemaError("unknown type '" + std::string(name) + "'");
    return *t;
  }

  const std::string& type_name(TypeId id) const { return type_names_.at(id); }
  std::size_t num_types() const { return type_names_.size(); }

  // Re-declaring a predicate with the identical signature is a no-op; a
  // conflicting signature is a schema error.
  PredId declare_predicate(std::string_view name, std::vector<TypeId> arg_types) {
    if (!text::is_identifier(name)) {
      throw SchemaError("invalid predicate name '" + std::string(name) + "'");
    }
    if (arg_types.empty() || arg_types.size() > kMaxArity) {
      throw SchemaError("predicate '" + std::string(name) + "' must have arity 1.." +
                        std::to_string(kMaxArity));
    }
    for (TypeId t : arg_types) {
      if (t >= type_names_.size()) throw SchemaError("unknown type id in predicate signature");
    }
    const std::string key(name);
    if (auto it = pred_ids_.find(key); it != pred_ids_.end()) {
      if (preds_[it->second].arg_types != arg_types) {
        throw SchemaError("predicate '" + key + "' redeclared with a different signature");
      }
      return it->second;
    }
    const auto id = static_cast<PredId>(preds_.size());
    preds_.push_back(PredicateSchema{key, std::move(arg_types)});
    pred_ids_.emplace(key, id);
    return id;
  }

  PredId declare_predicate(std::string_view name, std::initializer_list<std::string_view> types) {
    std::vector<TypeId> ids;
    for (auto t : types) ids.push_back(declare_type(t));
    return declare_predicate(name, std::move(ids));
  }

  std::optional<PredId> find_predicate(std::string_view name) const {
    auto it = pred_ids_.find(std::string(name));
    if (it == pred_ids_.end()) return std::nullopt;
    return it->second;
  }

  PredId predicate_id(std::string_view name) const {
    auto p = find_predicate(name);
    if (!p) throw SchemaError("unknown predicate '" + std::string(name) + "'");
    return *p;
  }

  const PredicateSchema& predicate(PredId id) const { return preds_.at(id); }
  std::size_t num_predicates() const { return preds_.size(); }

  // Interns `symbol` as a constant of `type`. A symbol may carry only one
  // type.
  ConstId intern(std::string_view symbol, TypeId type) {
    std::string key(symbol);
    if (auto it = const_ids_.find(key); it != const_ids_.end()) {
      if (const_types_[it->second] != type) {
        throw SchemaError("constant '" + key + "' has type '" +
                          type_names_[const_types_[it->second]] + "', used as '" +
                          type_names_.at(type) + "'");
      }
      return it->second;
    }
    if (!text::is_constant_symbol(symbol)) {
      throw SchemaError("invalid constant symbol '" + key + "'");
    }
    if (type >= type_names_.size()) throw SchemaError("unknown type id for constant");
    const auto id = static_cast<ConstId>(const_symbols_.size());
    const_symbols_.push_back(key);
    const_types_.push_back(type);
    const_ids_.emplace(std::move(key), id);
    return id;
  }

  std::optional<ConstId> find_constant(std::string_view symbol) const {
    auto it = const_ids_.find(std::string(symbol));
    if (it == const_ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& symbol(ConstId id) const { return const_symbols_.at(id); }
  TypeId constant_type(ConstId id) const { return const_types_.at(id); }
  std::size_t num_constants() const { return const_symbols_.size(); }

 private:
  std::vector<std::string> type_names_;
  std::unordered_map<std::string, TypeId> type_ids_;
  std::vector<PredicateSchema> preds_;
  std::unordered_map<std::string, PredId> pred_ids_;
  std::vector<std::string> const_symbols_;
  std::vector<TypeId> const_types_;
  std::unordered_map<std::string, ConstId> const_ids_;
};

struct GroundAtom {
  PredId pred = 0;
  std::vector<ConstId> args;

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
};

inline std::string format_atom(const Vocabulary& vocab, PredId pred, std::span<const ConstId> args) {
  std::string out = vocab.predicate(pred).name;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += vocab.symbol(args[i]);
  }
  out += ')';
  return out;
}

inline std::string format_atom(const Vocabulary& vocab, const GroundAtom& atom) {
  return format_atom(vocab, atom.pred, atom.args);
}

// Throws SchemaError unless `atom` matches its predicate's signature.
inline void check_atom(const Vocabulary& vocab, const GroundAtom& atom) {
  if (atom.pred >= vocab.num_predicates()) throw SchemaError("unknown predicate id");
  const auto& schema = vocab.predicate(atom.pred);
  if (atom.args.size() != schema.arity()) {
    throw SchemaError("predicate '" + schema.name + "' expects " +
                      std::to_string(schema.arity()) + " arguments, got " +
                      std::to_string(atom.args.size()));
  }
  for (std::size_t k = 0; k < atom.args.size(); ++k) {
    const ConstId c = atom.args[k];
    if (c >= vocab.num_constants()) throw SchemaError("unknown constant id");
    if (vocab.constant_type(c) != schema.arg_types[k]) {
      throw SchemaError("predicate '" + schema.name + "' position " + std::to_string(k) +
                        " expects type '" + vocab.type_name(schema.arg_types[k]) +
                        "', got constant '" + vocab.symbol(c) + "' of type '" +
                        vocab.type_name(vocab.constant_type(c)) + "'");
    }
  }
}

// Builds a ground atom from symbols, interning constants with the types
// the predicate declares.
inline GroundAtom make_atom(Vocabulary& vocab, std::string_view pred,
                            std::span<const std::string> args) {
  const PredId id = vocab.predicate_id(pred);
  const auto& schema = vocab.predicate(id);
  if (args.size() != schema.arity()) {
    throw SchemaError("predicate '" + schema.name + "' expects " +
                      std::to_string(schema.arity()) + " arguments, got " +
                      std::to_string(args.size()));
  }
  GroundAtom atom{id, {}};
  atom.args.reserve(args.size());
  for (std::size_t k = 0; k < args.size(); ++k) {
    try {
      atom.args.push_back(vocab.intern(args[k], schema.arg_types[k]));
    } catch (const SchemaError& e) {
      throw SchemaError("predicate '" + schema.name + "' position " + std::to_string(k) + ": " +
                        e.message());
    }
  }
  return atom;
}

inline GroundAtom make_atom(Vocabulary& vocab, std::string_view pred,
                            std::initializer_list<std::string> args) {
  return make_atom(vocab, pred, std::span<const std::string>(args.begin(), args.size()));
}

// ---------------------------------------------------------------------------
// Clauses

struct Variable {
  std::string name;
  TypeId type = 0;
};

// A term is either a variable (slot into the enclosing clause's variable
// table) or a constant.
struct Term {
  enum class Kind : std::uint8_t { kVar, kConst };
  Kind kind = Kind::kVar;
  std::uint32_t id = 0;

  static Term var(std::uint32_t slot) { return {Kind::kVar, slot}; }
  static Term constant(ConstId c) { return {Kind::kConst, c}; }
  bool is_var() const { return kind == Kind::kVar; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

struct Literal {
  PredId pred = 0;
  std::vector<Term> terms;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

// Conjunction of literals with its variable table.
struct Clause {
  std::vector<Variable> vars;
  std::vector<Literal> literals;
};

// Partial assignment indexed by variable slot; kUnbound marks free slots.
using Binding = std::vector<ConstId>;

// Checks literal arities and that every term's type agrees with the
// predicate signature and the variable table.
inline void check_clause(const Vocabulary& vocab, const Clause& clause) {
  for (const auto& lit : clause.literals) {
    if (lit.pred >= vocab.num_predicates()) throw ClauseError("unknown predicate id");
    const auto& schema = vocab.predicate(lit.pred);
    if (lit.terms.size() != schema.arity()) {
      throw ClauseError("literal over '" + schema.name + "' has wrong arity");
    }
    for (std::size_t k = 0; k < lit.terms.size(); ++k) {
      const Term t = lit.terms[k];
      TypeId type = 0;
      if (t.is_var()) {
        if (t.id >= clause.vars.size()) throw ClauseError("variable slot out of range");
        type = clause.vars[t.id].type;
      } else {
        if (t.id >= vocab.num_constants()) throw ClauseError("unknown constant id");
        type = vocab.constant_type(t.id);
      }
      if (type != schema.arg_types[k]) {
        throw ClauseError("type mismatch in literal over '" + schema.name + "' at position " +
                          std::to_string(k));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// FactBase

class FactBase {
 public:
  explicit FactBase(std::shared_ptr<Vocabulary> vocab) : vocab_(std::move(vocab)) {
    if (!vocab_) throw SchemaError("fact base requires a vocabulary");
  }

  const Vocabulary& vocab() const { return *vocab_; }
  Vocabulary& mutable_vocab() { return *vocab_; }
  const std::shared_ptr<Vocabulary>& shared_vocab() const { return vocab_; }

  // Adds `atom`; returns false if it was already present.
  bool add_fact(const GroundAtom& atom) {
    if (frozen_) throw SchemaError("cannot add facts to a frozen fact base");
    check_atom(*vocab_, atom);
    return add_unchecked(atom.pred, atom.args);
  }

  bool add_fact(std::string_view pred, std::initializer_list<std::string> args) {
    return add_fact(make_atom(*vocab_, pred, args));
  }

  // Sorts every relation and builds the argument indexes. Idempotent.
  // After freezing the fact base is read-only.
  void freeze() {
    if (frozen_) return;
    sync_relations();
    const std::size_t n_consts = vocab_->num_constants();
    for (auto& rel : relations_) rel.freeze(n_consts);
    frozen_ = true;
  }

  bool frozen() const { return frozen_; }

  // Unfrozen copy holding the same facts.
  FactBase thawed_copy() const {
    FactBase out(vocab_);
    out.sync_relations();
    for (PredId p = 0; p < relations_.size(); ++p) {
      const auto& rel = relations_[p];
      for (std::size_t r = 0; r < rel.size(); ++r) out.add_unchecked(p, rel.row(r));
    }
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& rel : relations_) n += rel.size();
    return n;
  }

  std::size_t count(PredId pred) const {
    return pred < relations_.size() ? relations_[pred].size() : 0;
  }

  bool contains(const GroundAtom& atom) const {
    require_frozen();
    return atom.pred < relations_.size() && relations_[atom.pred].contains(atom.args);
  }

  bool contains(PredId pred, std::span<const ConstId> args) const {
    require_frozen();
    return pred < relations_.size() && relations_[pred].contains(args);
  }

  // Row ids of the facts of `pred` having constant `c` at position `pos`,
  // in lexicographic order of the facts.
  std::span<const std::uint32_t> lookup(PredId pred, std::size_t pos, ConstId c) const {
    require_frozen();
    if (pred >= relations_.size()) return {};
    return relations_[pred].lookup(pos, c);
  }

  std::vector<GroundAtom> lookup_atoms(PredId pred, std::size_t pos, ConstId c) const {
    std::vector<GroundAtom> out;
    for (auto r : lookup(pred, pos, c)) out.push_back(atom(pred, r));
    return out;
  }

  std::span<const ConstId> row(PredId pred, std::uint32_t r) const {
    return relations_[pred].row(r);
  }

  GroundAtom atom(PredId pred, std::uint32_t r) const {
    auto args = row(pred, r);
    return GroundAtom{pred, std::vector<ConstId>(args.begin(), args.end())};
  }

  // Calls fn(const GroundAtom&) for every fact, by predicate id then row.
  template <typename Fn>
  void for_each_fact(Fn&& fn) const {
    for (PredId p = 0; p < relations_.size(); ++p) {
      for (std::uint32_t r = 0; r < relations_[p].size(); ++r) fn(atom(p, r));
    }
  }

  // Calls fn(std::span<const ConstId>) for every fact of `pred`.
  template <typename Fn>
  void for_each_row(PredId pred, Fn&& fn) const {
    if (pred >= relations_.size()) return;
    const auto& rel = relations_[pred];
    for (std::uint32_t r = 0; r < rel.size(); ++r) fn(rel.row(r));
  }

  std::size_t relation_size(PredId pred) const { return count(pred); }

 private:
  class Relation {
   public:
    explicit Relation(std::size_t arity) : arity_(arity) {}

    std::size_t size() const { return arity_ ? data_.size() / arity_ : 0; }
    std::size_t arity() const { return arity_; }

    std::span<const ConstId> row(std::size_t r) const {
      return {data_.data() + r * arity_, arity_};
    }

    bool add(std::span<const ConstId> args) {
      std::string key(reinterpret_cast<const char*>(args.data()), args.size() * sizeof(ConstId));
      if (!keys_.insert(std::move(key)).second) return false;
      data_.insert(data_.end(), args.begin(), args.end());
      return true;
    }

    void freeze(std::size_t n_consts) {
      const std::size_t n = size();
      std::vector<std::uint32_t> order(n);
      std::iota(order.begin(), order.end(), 0u);
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::lexicographical_compare(data_.begin() + a * arity_,
                                            data_.begin() + (a + 1) * arity_,
                                            data_.begin() + b * arity_,
                                            data_.begin() + (b + 1) * arity_);
      });
      std::vector<ConstId> sorted;
      sorted.reserve(data_.size());
      for (auto r : order) {
        sorted.insert(sorted.end(), data_.begin() + r * arity_, data_.begin() + (r + 1) * arity_);
      }
      data_ = std::move(sorted);
      keys_ = {};

      // Counting sort per position; stable, so rows within a bucket stay in
      // lexicographic order.
      offsets_.assign(arity_, std::vector<std::uint32_t>(n_consts + 1, 0));
      rows_.assign(arity_, std::vector<std::uint32_t>(n));
      for (std::size_t k = 0; k < arity_; ++k) {
        auto& off = offsets_[k];
        for (std::size_t r = 0; r < n; ++r) ++off[data_[r * arity_ + k] + 1];
        for (std::size_t c = 0; c < n_consts; ++c) off[c + 1] += off[c];
        std::vector<std::uint32_t> cursor(off.begin(), off.end() - 1);
        for (std::size_t r = 0; r < n; ++r) {
          rows_[k][cursor[data_[r * arity_ + k]]++] = static_cast<std::uint32_t>(r);
        }
      }
    }

    std::span<const std::uint32_t> lookup(std::size_t pos, ConstId c) const {
      if (pos >= arity_) return {};
      const auto& off = offsets_[pos];
      if (c + 1 >= off.size()) return {};
      return {rows_[pos].data() + off[c], off[c + 1] - off[c]};
    }

    // Binary search over the sorted rows. Requires freeze().
    bool contains(std::span<const ConstId> args) const {
      if (args.size() != arity_) return false;
      std::size_t lo = 0, hi = size();
      if (arity_ > 0 && !offsets_.empty()) {
        if (args[0] + 1 >= offsets_[0].size()) return false;
        lo = offsets_[0][args[0]];
        hi = offsets_[0][args[0] + 1];
      }
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        auto r = row(mid);
        const auto cmp = std::lexicographical_compare_three_way(r.begin(), r.end(), args.begin(),
                                                                args.end());
        if (cmp == 0) return true;
        if (cmp < 0) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      return false;
    }

   private:
    std::size_t arity_;
    std::vector<ConstId> data_;
    std::unordered_set<std::string> keys_;
    std::vector<std::vector<std::uint32_t>> offsets_;
    std::vector<std::vector<std::uint32_t>> rows_;
  };

  void sync_relations() {
    while (relations_.size() < vocab_->num_predicates()) {
      relations_.emplace_back(vocab_->predicate(static_cast<PredId>(relations_.size())).arity());
    }
  }

  bool add_unchecked(PredId pred, std::span<const ConstId> args) {
    sync_relations();
    return relations_[pred].add(args);
  }

  void require_frozen() const {
    if (!frozen_) throw SchemaError("fact base must be frozen before querying");
  }

  std::shared_ptr<Vocabulary> vocab_;
  std::vector<Relation> relations_;
  bool frozen_ = false;
};

// ---------------------------------------------------------------------------
// Satisfiability

// A single ground atom hidden from queries, used to keep an example's own
// evidence out of its evaluation.
struct FactMask {
  PredId pred = std::numeric_limits<PredId>::max();
  std::vector<ConstId> args;

  bool active() const { return pred != std::numeric_limits<PredId>::max(); }
  bool matches(PredId p, std::span<const ConstId> a) const {
    return p == pred && std::equal(a.begin(), a.end(), args.begin(), args.end());
  }
};

namespace detail {

// Left-to-right backtracking search. Candidates for a positive literal come
// from the index on its first bound argument (or a full scan when none is
// bound), in interned-id order.
class Satisfier {
 public:
  Satisfier(const FactBase& fb, std::span<const Literal> lits, Binding& binding,
            const FactMask* mask)
      : fb_(fb), lits_(lits), binding_(binding), mask_(mask && mask->active() ? mask : nullptr) {}

  bool run() { return solve(0); }

 private:
  ConstId value(const Term& t) const { return t.is_var() ? binding_[t.id] : t.id; }

  bool present(PredId pred, std::span<const ConstId> args) const {
    if (mask_ && mask_->matches(pred, args)) return false;
    return fb_.contains(pred, args);
  }

  bool solve(std::size_t i) {
    if (i == lits_.size()) return true;
    const Literal& lit = lits_[i];
    const std::size_t arity = lit.terms.size();
    ConstId args[kMaxArity];
    int first_bound = -1;
    bool all_bound = true;
    for (std::size_t k = 0; k < arity; ++k) {
      args[k] = value(lit.terms[k]);
      if (args[k] == kUnbound) {
        all_bound = false;
      } else if (first_bound < 0) {
        first_bound = static_cast<int>(k);
      }
    }

    if (lit.negated) {
      if (!all_bound) {
        throw ClauseError("negated literal over '" + fb_.vocab().predicate(lit.pred).name +
                          "' has a variable with no earlier binder");
      }
      if (present(lit.pred, {args, arity})) return false;
      return solve(i + 1);
    }

    if (all_bound) return present(lit.pred, {args, arity}) && solve(i + 1);

    std::uint32_t newly[kMaxArity];
    auto try_row = [&](std::span<const ConstId> fact) -> bool {
      std::size_t n_new = 0;
      bool ok = true;
      for (std::size_t k = 0; k < arity && ok; ++k) {
        const Term& t = lit.terms[k];
        if (!t.is_var()) {
          ok = fact[k] == t.id;
        } else if (binding_[t.id] == kUnbound) {
          binding_[t.id] = fact[k];
          newly[n_new++] = t.id;
        } else {
          ok = binding_[t.id] == fact[k];
        }
      }
      if (ok && mask_ && mask_->matches(lit.pred, fact)) ok = false;
      const bool found = ok && solve(i + 1);
      for (std::size_t j = 0; j < n_new; ++j) binding_[newly[j]] = kUnbound;
      return found;
    };

    if (first_bound >= 0) {
      for (auto r : fb_.lookup(lit.pred, static_cast<std::size_t>(first_bound), args[first_bound])) {
        if (try_row(fb_.row(lit.pred, r))) return true;
      }
      return false;
    }
    const std::size_t n = fb_.relation_size(lit.pred);
    for (std::uint32_t r = 0; r < n; ++r) {
      if (try_row(fb_.row(lit.pred, r))) return true;
    }
    return false;
  }

  const FactBase& fb_;
  std::span<const Literal> lits_;
  Binding& binding_;
  const FactMask* mask_;
};

}  // namespace detail

// Hot-path query without type checks. `binding` must be sized to cover
// every variable slot used by `lits`; it is restored before returning.
inline bool satisfies(const FactBase& fb, std::span<const Literal> lits, Binding& binding,
                      const FactMask* mask = nullptr) {
  return detail::Satisfier(fb, lits, binding, mask).run();
}

// True iff some extension of `binding` makes every positive literal a fact
// and no negated literal a fact (negation as failure).
inline bool satisfiable(const FactBase& fb, const Clause& clause, const Binding& binding,
                        const FactMask* mask = nullptr) {
  check_clause(fb.vocab(), clause);
  if (binding.size() > clause.vars.size()) throw ClauseError("binding has more slots than variables");
  Binding b(clause.vars.size(), kUnbound);
  for (std::size_t i = 0; i < binding.size(); ++i) {
    if (binding[i] == kUnbound) continue;
    if (binding[i] >= fb.vocab().num_constants() ||
        fb.vocab().constant_type(binding[i]) != clause.vars[i].type) {
      throw ClauseError("binding for variable '" + clause.vars[i].name + "' has the wrong type");
    }
    b[i] = binding[i];
  }
  // Range restriction: every variable of a negated literal must be bound
  // by the initial binding or an earlier positive literal.
  std::vector<bool> bound(clause.vars.size());
  for (std::size_t i = 0; i < b.size(); ++i) bound[i] = b[i] != kUnbound;
  for (const auto& lit : clause.literals) {
    for (const auto& t : lit.terms) {
      if (!t.is_var()) continue;
      if (lit.negated && !bound[t.id]) {
        throw ClauseError("variable '" + clause.vars[t.id].name +
                          "' in a negated literal has no earlier binder");
      }
    }
    if (!lit.negated) {
      for (const auto& t : lit.terms) {
        if (t.is_var()) bound[t.id] = true;
      }
    }
  }
  return satisfies(fb, clause.literals, b, mask);
}

// ---------------------------------------------------------------------------
// Text formats

// Schema file: `type user.` and `pred userSkill(user, skill).` lines; `%`
// comments; blank lines ignored.
inline void parse_schema(std::istream& in, Vocabulary& vocab) {
  std::string line;
  std::size_t lineno = 0;
  text::AtomText atom;
  while (std::getline(in, line)) {
    ++lineno;
    auto s = text::trim(text::strip_comment(line));
    if (s.empty()) continue;
    try {
      if (s.starts_with("type") && s.size() > 4 && text::is_space(s[4])) {
        auto rest = text::trim(s.substr(4));
        if (rest.empty() || rest.back() != '.') throw ParseError("expected 'type <name>.'", lineno);
        auto name = text::trim(rest.substr(0, rest.size() - 1));
        if (!text::is_identifier(name)) throw ParseError("invalid type name", lineno);
        vocab.declare_type(name);
      } else if (s.starts_with("pred") && s.size() > 4 && text::is_space(s[4])) {
        if (!text::parse_atom_statement(s.substr(4), atom)) {
          throw ParseError("expected 'pred <name>(<type>, ...).'", lineno);
        }
        std::vector<TypeId> types;
        for (const auto& t : atom.args) {
          auto id = vocab.find_type(t);
          if (!id) throw SchemaError("line " + std::to_string(lineno) + ": unknown type '" + t + "'");
          types.push_back(*id);
        }
        vocab.declare_predicate(atom.name, std::move(types));
      } else {
        throw ParseError("expected a 'type' or 'pred' declaration", lineno);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const SchemaError& e) {
      if (e.message().starts_with("line ")) throw;
      throw SchemaError("line " + std::to_string(lineno) + ": " + e.message());
    }
  }
}

inline void write_schema(std::ostream& out, const Vocabulary& vocab) {
  for (TypeId t = 0; t < vocab.num_types(); ++t) out << "type " << vocab.type_name(t) << ".\n";
  for (PredId p = 0; p < vocab.num_predicates(); ++p) {
    const auto& s = vocab.predicate(p);
    out << "pred " << s.name << '(';
    for (std::size_t k = 0; k < s.arity(); ++k) {
      if (k) out << ", ";
      out << vocab.type_name(s.arg_types[k]);
    }
    out << ").\n";
  }
}

// Reads fact lines into `fb`. Constants are registered with the type the
// predicate declares at their position.
inline void load_facts(std::istream& in, FactBase& fb) {
  std::string line;
  std::size_t lineno = 0;
  text::AtomText atom;
  auto& vocab = fb.mutable_vocab();
  const auto at = [&](const std::string& msg) {
    return "line " + std::to_string(lineno) + ": " + msg;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto s = text::trim(text::strip_comment(line));
    if (s.empty()) continue;
    if (!text::parse_atom_statement(s, atom)) throw ParseError("malformed fact", lineno);
    auto pred = vocab.find_predicate(atom.name);
    if (!pred) throw SchemaError(at("unknown predicate '" + atom.name + "'"));
    const auto& schema = vocab.predicate(*pred);
    if (atom.args.size() != schema.arity()) {
      throw SchemaError(at("predicate '" + schema.name + "' has arity " +
                           std::to_string(schema.arity()) + ", got " +
                           std::to_string(atom.args.size()) + " arguments"));
    }
    GroundAtom g{*pred, {}};
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
      if (!text::is_constant_symbol(atom.args[k])) {
        throw ParseError("invalid constant '" + atom.args[k] + "'", lineno);
      }
      try {
        g.args.push_back(vocab.intern(atom.args[k], schema.arg_types[k]));
      } catch (const SchemaError& e) {
        throw SchemaError(at(e.message()));
      }
    }
    fb.add_fact(g);
  }
}

inline FactBase parse_facts(std::istream& in, std::shared_ptr<Vocabulary> vocab) {
  FactBase fb(std::move(vocab));
  load_facts(in, fb);
  return fb;
}

// One fact per line, grouped by predicate in declaration order. Frozen fact
// bases emit rows in sorted order, so output is deterministic.
inline void write_facts(std::ostream& out, const FactBase& fb) {
  fb.for_each_fact([&](const GroundAtom& a) { out << format_atom(fb.vocab(), a) << ".\n"; });
}

}  // namespace rfgb

#endif  // RFGB_FACTSTORE_HPP_
