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

// Small text helpers shared by the line-oriented file formats.

#ifndef RFGB_TEXT_HPP_
#define RFGB_TEXT_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rfgb/error.hpp"

namespace rfgb::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Removes everything from the first `marker` on.
inline std::string_view strip_comment(std::string_view s, char marker = '%') {
  const auto pos = s.find(marker);
  return pos == std::string_view::npos ? s : s.substr(0, pos);
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Predicate and type names: [a-zA-Z_][a-zA-Z0-9_]*
inline bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

// Constant symbols additionally admit a leading digit so that small integer
// codes (distance buckets) can be written as-is: [a-zA-Z0-9_]+
inline bool is_constant_symbol(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

// An atom as written in text: `name(arg, arg, ...)`. Arguments are kept as
// trimmed raw tokens; callers validate them.
struct AtomText {
  std::string name;
  std::vector<std::string> args;
};

// Parses `name(a, b, ...)` from the start of `s` and returns the number of
// characters consumed, or nullopt on malformed input. Leading whitespace is
// skipped. An argument token is any run of characters other than `,()`.
inline std::optional<std::size_t> parse_atom_prefix(std::string_view s, AtomText& out) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  const std::size_t name_begin = i;
  while (i < s.size() && is_ident_char(s[i])) ++i;
  out.name.assign(s.substr(name_begin, i - name_begin));
  if (!is_identifier(out.name)) return std::nullopt;
  while (i < s.size() && is_space(s[i])) ++i;
  if (i >= s.size() || s[i] != '(') return std::nullopt;
  ++i;
  out.args.clear();
  for (;;) {
    const std::size_t arg_begin = i;
    while (i < s.size() && s[i] != ',' && s[i] != ')' && s[i] != '(') ++i;
    if (i >= s.size() || s[i] == '(') return std::nullopt;
    const auto arg = trim(s.substr(arg_begin, i - arg_begin));
    if (arg.empty()) return std::nullopt;
    out.args.emplace_back(arg);
    if (s[i] == ')') {
      ++i;
      break;
    }
    ++i;  // ','
  }
  return i;
}

// Parses a full statement `name(args).` with nothing but whitespace after
// the period.
inline bool parse_atom_statement(std::string_view s, AtomText& out) {
  const auto used = parse_atom_prefix(s, out);
  if (!used) return false;
  auto rest = trim(s.substr(*used));
  return rest == ".";
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  Int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rfgb::text

#endif  // RFGB_TEXT_HPP_
