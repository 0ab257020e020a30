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

#ifndef RFGB_ERROR_HPP_
#define RFGB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rfgb {

// Error categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kConfig = 2,
  kParse = 3,
  kSchema = 4,
  kTraining = 5,
  kEvaluation = 6,
  // Malformed clause, e.g. an unbound variable under negation.
  kClause = 7,
  kModel = 8,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kClause: return "clause error";
    case ErrorKind::kModel: return "model error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the category prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

#define RFGB_DEFINE_ERROR(Name, Kind)                       \
  class Name : public Error {                               \
   public:                                                  \
    explicit Name(const std::string& message)               \
        : Error(ErrorKind::Kind, message) {}                \
  }

RFGB_DEFINE_ERROR(ConfigError, kConfig);
RFGB_DEFINE_ERROR(SchemaError, kSchema);
RFGB_DEFINE_ERROR(TrainingError, kTraining);
RFGB_DEFINE_ERROR(EvaluationError, kEvaluation);
RFGB_DEFINE_ERROR(ClauseError, kClause);
RFGB_DEFINE_ERROR(ModelError, kModel);

#undef RFGB_DEFINE_ERROR

// Parse errors carry the 1-based line number of the offending input line
// (0 when not line-oriented).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(ErrorKind::kParse, line ? "line " + std::to_string(line) + ": " + message
                                      : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rfgb

#endif  // RFGB_ERROR_HPP_
