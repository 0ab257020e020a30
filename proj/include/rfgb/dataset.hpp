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

// Dataset directories:
//
//   schema.txt                    type / pred declarations
//   facts_train.txt facts_test.txt
//   pos_train.txt neg_train.txt   target atoms, one per line
//   pos_test.txt neg_test.txt
//   modes_content.txt modes_hybrid.txt
//   synth_config.txt              key=value (generated datasets only)
//
// Train and test share one vocabulary so a model trained on one side can
// score the other.

#ifndef RFGB_DATASET_HPP_
#define RFGB_DATASET_HPP_

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rfgb/boost.hpp"
#include "rfgb/factstore.hpp"
#include "rfgb/hybrid.hpp"

namespace rfgb {

struct DatasetSplit {
  std::shared_ptr<Vocabulary> vocab;
  std::unique_ptr<FactBase> fb_train;
  std::unique_ptr<FactBase> fb_test;
  std::vector<LabeledExample> train_pos, train_neg, test_pos, test_neg;
};

namespace fs = std::filesystem;

// Writes `content` to `path` through a temporary file and a rename, so a
// reader never sees a partial file.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot rename onto '" + path.string() + "': " + ec.message());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  write_file_atomic(path, out.str());
}

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return in;
}

// Wraps parse and schema errors with the file name.
template <typename Fn>
auto with_file(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.message(), e.line());
  } catch (const SchemaError& e) {
    throw SchemaError(path.filename().string() + ": " + e.message());
  }
}

inline void write_examples(std::ostream& out, const Vocabulary& vocab,
                           const std::vector<LabeledExample>& examples) {
  for (const auto& e : examples) out << format_atom(vocab, e.target) << ".\n";
}

inline std::vector<LabeledExample> parse_examples(std::istream& in, Vocabulary& vocab,
                                                  PredId target, int label) {
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t lineno = 0;
  text::AtomText atom;
  const auto& schema = vocab.predicate(target);
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = text::trim(text::strip_comment(line));
    if (s.empty()) continue;
    if (!text::parse_atom_statement(s, atom)) throw ParseError("malformed example", lineno);
    if (atom.name != schema.name) {
      throw SchemaError("line " + std::to_string(lineno) + ": expected a '" + schema.name +
                        "' atom, got '" + atom.name + "'");
    }
    if (atom.args.size() != schema.arity()) {
      throw SchemaError("line " + std::to_string(lineno) + ": wrong arity for '" + schema.name + "'");
    }
    GroundAtom g{target, {}};
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
      if (!text::is_constant_symbol(atom.args[k])) {
        throw ParseError("invalid constant '" + atom.args[k] + "'", lineno);
      }
      try {
        g.args.push_back(vocab.intern(atom.args[k], schema.arg_types[k]));
      } catch (const SchemaError& e) {
        throw SchemaError("line " + std::to_string(lineno) + ": " + e.message());
      }
    }
    out.push_back({std::move(g), label});
  }
  return out;
}

inline void write_dataset(const fs::path& dir, const DatasetSplit& d) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create '" + dir.string() + "': " + ec.message());
  const auto& v = *d.vocab;
  write_with(dir / "schema.txt", [&](std::ostream& o) { write_schema(o, v); });
  write_with(dir / "facts_train.txt", [&](std::ostream& o) { write_facts(o, *d.fb_train); });
  write_with(dir / "facts_test.txt", [&](std::ostream& o) { write_facts(o, *d.fb_test); });
  write_with(dir / "pos_train.txt", [&](std::ostream& o) { write_examples(o, v, d.train_pos); });
  write_with(dir / "neg_train.txt", [&](std::ostream& o) { write_examples(o, v, d.train_neg); });
  write_with(dir / "pos_test.txt", [&](std::ostream& o) { write_examples(o, v, d.test_pos); });
  write_with(dir / "neg_test.txt", [&](std::ostream& o) { write_examples(o, v, d.test_neg); });
  write_file_atomic(dir / "modes_content.txt", rec::mode_preset_text("content"));
  write_file_atomic(dir / "modes_hybrid.txt", rec::mode_preset_text("hybrid"));
}

// Reads a dataset directory; both fact bases are returned frozen.
inline DatasetSplit load_dataset(const fs::path& dir) {
  DatasetSplit d;
  d.vocab = std::make_shared<Vocabulary>();
  auto& v = *d.vocab;
  {
    const auto path = dir / "schema.txt";
    auto in = open_input(path);
    with_file(path, [&] { parse_schema(in, v); });
  }
  const auto target = v.find_predicate(rec::kTarget);
  if (!target) throw SchemaError("schema.txt: no '" + std::string(rec::kTarget) + "' predicate");
  const auto facts = [&](const char* name) {
    const auto path = dir / name;
    auto in = open_input(path);
    auto fb = std::make_unique<FactBase>(d.vocab);
    with_file(path, [&] { load_facts(in, *fb); });
    return fb;
  };
  d.fb_train = facts("facts_train.txt");
  d.fb_test = facts("facts_test.txt");
  const auto examples = [&](const char* name, int label) {
    const auto path = dir / name;
    auto in = open_input(path);
    return with_file(path, [&] { return parse_examples(in, v, *target, label); });
  };
  d.train_pos = examples("pos_train.txt", kMatch);
  d.train_neg = examples("neg_train.txt", kMisMatch);
  d.test_pos = examples("pos_test.txt", kMatch);
  d.test_neg = examples("neg_test.txt", kMisMatch);
  // Constants first seen in example files must exist before indexes are built.
  d.fb_train->freeze();
  d.fb_test->freeze();
  return d;
}

// Mode file of a dataset, or the built-in preset when the file is absent.
inline std::vector<ModeDecl> load_modes(const fs::path& dir, const std::string& preset,
                                        const Vocabulary& vocab) {
  rec::mode_preset_text(preset);  // validates the name
  const auto path = dir / ("modes_" + preset + ".txt");
  if (!fs::exists(path)) return rec::mode_preset(preset, vocab);
  auto in = open_input(path);
  return with_file(path, [&] { return parse_modes(in, vocab); });
}

}  // namespace rfgb

#endif  // RFGB_DATASET_HPP_
