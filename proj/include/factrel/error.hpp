#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace factrel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed query, database, TBox, digraph or CNF text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A well-formed input that violates a semantic constraint (arity clash,
/// fact not in the database, unsupported signature, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (subset count, self-join width, interaction width,
/// ...) was exceeded.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// The knowledge base has no model. Carries a conflicting set of at most two
/// ABox facts, serialized.
class InconsistentKB : public Error {
 public:
  InconsistentKB(const std::string& msg, std::vector<std::string> conflict)
      : Error(msg), conflict_(std::move(conflict)) {}
  const std::vector<std::string>& conflict() const { return conflict_; }

 private:
  std::vector<std::string> conflict_;
};

}  // namespace factrel
