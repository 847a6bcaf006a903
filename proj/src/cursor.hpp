#pragma once

// Character-level scanner shared by the term and model parsers.

#include <cctype>
#include <string>
#include <string_view>

#include "keyorder/term.hpp"

namespace keyorder::detail {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() { skip(); return pos_ >= text_.size(); }
  char peek() { skip(); return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char peek_raw(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  bool starts_with(std::string_view s) {
    skip();
    return text_.substr(pos_).starts_with(s);
  }
  bool accept(std::string_view s) {
    if (!starts_with(s)) return false;
    advance(s.size());
    return true;
  }
  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }

  /// Identifier followed by a non-identifier character.
  bool accept_keyword(std::string_view kw) {
    if (!starts_with(kw)) return false;
    char after = peek_raw(kw.size());
    if (std::isalnum(static_cast<unsigned char>(after)) || after == '_') return false;
    advance(kw.size());
    return true;
  }

  bool at_identifier() {
    char c = peek();
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string identifier() {
    if (!at_identifier()) fail("expected identifier");
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      advance(1);
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string number() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance(1);
    if (start == pos_) fail("expected number");
    return std::string(text_.substr(start, pos_ - start));
  }

  /// Text up to (not including) the delimiter; no comment stripping inside.
  std::string quoted(char delim) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != delim) fail(std::string("expected ") + delim);
    advance(1);
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != delim) {
      if (text_[pos_] == '\n' && delim == '\'') fail("unterminated constant");
      advance(1);
    }
    if (pos_ >= text_.size()) fail("unterminated quoted text");
    std::string out(text_.substr(start, pos_ - start));
    advance(1);
    return out;
  }

  /// Raw source text up to the first occurrence of any stop character.
  std::string raw_until(std::string_view stops) {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && stops.find(text_[pos_]) == std::string_view::npos) advance(1);
    return std::string(text_.substr(start, pos_ - start));
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw TermSyntaxError(message, line_, column_);
  }

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
    }
  }

  void skip() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance(1);
      if (text_.substr(pos_).starts_with("//")) {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else if (text_.substr(pos_).starts_with("/*")) {
        std::size_t end = text_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated block comment");
        advance(end + 2 - pos_);
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

Term parse_term_at(Cursor& cur, const Signature& sig);

}  // namespace keyorder::detail
