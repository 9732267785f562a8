#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "factrel/error.hpp"

namespace factrel::detail {

/// Character cursor with line/column tracking. `#` starts a comment that
/// runs to the end of the line.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  char peek_at(std::size_t offset) const {
    return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0';
  }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

  char get() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  /// Skips blanks and comments. Newlines are skipped too unless
  /// `stop_at_newline` is set.
  void skip_space(bool stop_at_newline = false) {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') get();
      } else if (c == '\n' && stop_at_newline) {
        return;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else {
        return;
      }
    }
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  /// Identifier, optionally `?`-prefixed when `allow_var` is set.
  std::string identifier(bool allow_var) {
    std::string out;
    if (allow_var && peek() == '?') out.push_back(get());
    if (!ident_start(peek())) fail(allow_var ? "expected a term" : "expected an identifier");
    while (!at_end() && ident_char(peek())) out.push_back(get());
    return out;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  bool accept(char c) {
    if (peek() != c) return false;
    get();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string found = at_end() ? "end of input" : std::string("'") + peek() + "'";
    throw ParseError(msg + ", found " + found, line_, column_);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace factrel::detail
