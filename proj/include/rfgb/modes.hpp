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

// Mode declarations restrict which literals the tree learner may place in a
// node test:
//   +type  input: must reuse a variable already in scope
//   -type  output: may reuse an in-scope variable or introduce a fresh one
//   #type  constant: one of the most frequent constants at that position
//
// File format, one per line: `mode userSkill(+user, -skill).`

#ifndef RFGB_MODES_HPP_
#define RFGB_MODES_HPP_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rfgb/factstore.hpp"

namespace rfgb {

enum class ArgMode : std::uint8_t { kInput, kOutput, kConstant };

struct ModeDecl {
  PredId pred = 0;
  std::vector<ArgMode> args;

  friend bool operator==(const ModeDecl&, const ModeDecl&) = default;
};

inline char mode_char(ArgMode m) {
  switch (m) {
    case ArgMode::kInput: return '+';
    case ArgMode::kOutput: return '-';
    case ArgMode::kConstant: return '#';
  }
  return '?';
}

// Throws SchemaError for unknown predicates, wrong lengths, or modes over
// the target predicate itself.
inline void check_modes(const Vocabulary& vocab, const std::vector<ModeDecl>& modes,
                        std::optional<PredId> target = std::nullopt) {
  for (const auto& m : modes) {
    if (m.pred >= vocab.num_predicates()) throw SchemaError("mode over unknown predicate");
    const auto& schema = vocab.predicate(m.pred);
    if (m.args.size() != schema.arity()) {
      throw SchemaError("mode for '" + schema.name + "' has wrong length");
    }
    if (target && m.pred == *target) {
      throw SchemaError("mode declared over target predicate '" + schema.name + "'");
    }
  }
}

inline std::string format_mode(const Vocabulary& vocab, const ModeDecl& m) {
  const auto& schema = vocab.predicate(m.pred);
  std::string out = "mode " + schema.name + "(";
  for (std::size_t k = 0; k < m.args.size(); ++k) {
    if (k) out += ", ";
    out += mode_char(m.args[k]);
    out += vocab.type_name(schema.arg_types[k]);
  }
  return out + ").";
}

inline std::vector<ModeDecl> parse_modes(std::istream& in, const Vocabulary& vocab) {
  std::vector<ModeDecl> modes;
  std::string line;
  std::size_t lineno = 0;
  text::AtomText atom;
  while (std::getline(in, line)) {
    ++lineno;
    auto s = text::trim(text::strip_comment(line));
    if (s.empty()) continue;
    if (!s.starts_with("mode") || s.size() < 5 || !text::is_space(s[4]) ||
        !text::parse_atom_statement(s.substr(4), atom)) {
      throw ParseError("expected 'mode <pred>(<+|-|#><type>, ...).'", lineno);
    }
    const auto pred = vocab.find_predicate(atom.name);
    if (!pred) {
      throw SchemaError("line " + std::to_string(lineno) + ": mode over unknown predicate '" +
                        atom.name + "'");
    }
    const auto& schema = vocab.predicate(*pred);
    if (atom.args.size() != schema.arity()) {
      throw SchemaError("line " + std::to_string(lineno) + ": mode for '" + schema.name +
                        "' has " + std::to_string(atom.args.size()) + " arguments, expected " +
                        std::to_string(schema.arity()));
    }
    ModeDecl decl{*pred, {}};
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
      const std::string& a = atom.args[k];
      ArgMode mode;
      switch (a.front()) {
        case '+': mode = ArgMode::kInput; break;
        case '-': mode = ArgMode::kOutput; break;
        case '#': mode = ArgMode::kConstant; break;
        default: throw ParseError("argument '" + a + "' lacks a +, - or # marker", lineno);
      }
      const auto type = text::trim(std::string_view(a).substr(1));
      if (type != vocab.type_name(schema.arg_types[k])) {
        throw SchemaError("line " + std::to_string(lineno) + ": mode for '" + schema.name +
                          "' position " + std::to_string(k) + " names type '" + std::string(type) +
                          "', schema says '" + vocab.type_name(schema.arg_types[k]) + "'");
      }
      decl.args.push_back(mode);
    }
    modes.push_back(std::move(decl));
  }
  return modes;
}

inline void write_modes(std::ostream& out, const Vocabulary& vocab,
                        const std::vector<ModeDecl>& modes) {
  for (const auto& m : modes) out << format_mode(vocab, m) << '\n';
}

}  // namespace rfgb

#endif  // RFGB_MODES_HPP_
