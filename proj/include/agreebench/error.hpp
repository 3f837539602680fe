#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agreebench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax problems in grammar files; carries a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class GrammarError : public Error {
 public:
  using Error::Error;
};

// A test-case description that does not fit its grammar (missing locus,
// uncovered condition, unpaired lemma at the locus, ...).
class CaseSpecError : public Error {
 public:
  using Error::Error;
};

// Malformed pair or report file. `line` is 1-based, 0 when not applicable.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

// The external scorer process or socket failed.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace agreebench
