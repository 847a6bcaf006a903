#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "keyorder/term.hpp"

namespace keyorder {

/// Tamarin-style premise annotation: `F(..)[+]` or `F(..)[-]`.
enum class FactAnnotation : std::uint8_t { None, Prioritize, Deprioritize };

struct Fact {
  std::string name;
  bool persistent = false;
  std::vector<Term> args;
  FactAnnotation annotation = FactAnnotation::None;

  bool is(std::string_view n) const { return name == n; }
  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact& a, const Fact& b) {
    if (auto c = a.name <=> b.name; c != 0) return c;
    if (auto c = a.persistent <=> b.persistent; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                  b.args.end());
  }
};

std::string to_string(const Fact& f);

struct RewriteRule {
  std::string name;
  std::vector<Fact> premises;
  std::vector<Fact> actions;
  std::vector<Fact> conclusions;
  /// Sequential `let` bindings, already expanded into the fact lists above.
  std::vector<std::pair<Term, Term>> let_bindings;

  friend bool operator==(const RewriteRule&, const RewriteRule&) = default;
};

struct Lemma {
  std::string name;
  std::vector<std::string> attributes;  // verbatim, e.g. "reuse", "use_induction"
  std::string trace_quantifier;         // "all-traces", "exists-trace" or empty
  std::string formula;                  // verbatim, without the surrounding quotes

  bool has_attribute(std::string_view a) const;
  friend bool operator==(const Lemma&, const Lemma&) = default;
};

struct Restriction {
  std::string name;
  std::string formula;
  friend bool operator==(const Restriction&, const Restriction&) = default;
};

struct Model {
  std::string name;
  std::vector<std::string> builtins;
  /// Symbols declared with `functions:`, in declaration order.
  std::vector<std::pair<std::string, std::size_t>> functions;
  std::vector<RewriteRule> rules;
  std::vector<Lemma> lemmas;
  std::vector<Restriction> restrictions;

  Signature signature() const;
  const RewriteRule* find_rule(std::string_view rule_name) const;
  friend bool operator==(const Model&, const Model&) = default;
};

enum class Severity : std::uint8_t { Warning, Error };

struct Diagnostic {
  std::string rule;  // empty for model-level findings
  Severity severity = Severity::Error;
  std::string message;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::string to_string(const Diagnostic& d);

/// Raised for syntax errors (with position) and for invariant violations.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& message, int line = 0, int column = 0)
      : std::runtime_error(message), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ParseOptions {
  /// Run validate() and throw on the first error diagnostic.
  bool validate = true;
};

Model parse_model(std::string_view text, ParseOptions options = {});
Model load_model(const std::string& path, ParseOptions options = {});

/// Canonical text; parse_model(serialize(m)) == m.
std::string serialize(const Model& m);
std::string serialize(const Fact& f);

std::vector<Diagnostic> validate(const Model& m);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace keyorder
