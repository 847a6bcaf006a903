#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace keyorder {

enum class TermKind : std::uint8_t {
  FreshVar,   // ~x
  PublicVar,  // $x
  MsgVar,     // x
  Constant,   // 'c' (public name)
  FreshName,  // ground fresh value minted during execution, printed ~x.n
  Apply,      // f(t1, ..., tn)
};

/// Immutable first-order term. Copies share structure; comparison is
/// structural and defines a total order used for deterministic iteration.
class Term {
 public:
  static Term fresh_var(std::string name);
  static Term public_var(std::string name);
  static Term msg_var(std::string name);
  static Term constant(std::string name);
  static Term fresh_name(std::string name);
  static Term apply(std::string symbol, std::vector<Term> args = {});

  /// Right-nested pair(t1, pair(t2, ...)); a single element is returned as-is.
  static Term tuple(std::vector<Term> items);

  TermKind kind() const;
  /// Variable name (without sort marker), constant text, or function symbol.
  const std::string& name() const;
  std::span<const Term> args() const;
  const Term& arg(std::size_t i) const { return args()[i]; }
  std::size_t arity() const { return args().size(); }

  bool is_variable() const;
  bool is_apply() const { return kind() == TermKind::Apply; }
  bool is_apply(std::string_view symbol) const;
  bool is_ground() const;
  std::size_t hash() const;
  /// Height of the term tree; atoms have depth 1.
  int depth() const;
  std::size_t size() const;

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Term make(TermKind kind, std::string name, std::vector<Term> args);
  std::shared_ptr<const Node> node_;
};

std::string to_string(const Term& t);
std::ostream& operator<<(std::ostream& os, const Term& t);

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

/// Function symbols and arities. The cryptographic core is fixed; models may
/// declare additional symbols.
class Signature {
 public:
  Signature();

  static const Signature& builtin();

  /// Returns false if the symbol already exists with a different arity.
  bool declare(const std::string& symbol, std::size_t arity);
  std::optional<std::size_t> arity(std::string_view symbol) const;
  bool contains(std::string_view symbol) const { return arity(symbol).has_value(); }
  static bool is_builtin(std::string_view symbol);

 private:
  std::map<std::string, std::size_t, std::less<>> arities_;
};

/// Finite map from variables to terms.
using Substitution = std::map<Term, Term>;

Term substitute(const Term& t, const Substitution& s);

/// s2 after s1: substitute(t, compose(s1, s2)) == substitute(substitute(t, s1), s2).
Substitution compose(const Substitution& s1, const Substitution& s2);

/// Syntactic most-general unifier respecting the sort discipline
/// (msg variables may bind fresh/public terms, never the reverse).
std::optional<Substitution> unify(const Term& t1, const Term& t2);

/// Unifies extending an existing (idempotent) substitution.
bool unify_into(const Term& t1, const Term& t2, Substitution& s);

/// One-way matching of a pattern against a ground term, extending `s`.
/// On failure `s` may contain partial bindings; callers copy before trying.
bool match(const Term& pattern, const Term& ground, Substitution& s);

/// Whether a variable of the given sort may be bound to `t`.
bool sort_admits(TermKind var_kind, const Term& t);

Term normalize(const Term& t);
bool is_normal(const Term& t);

std::vector<Term> variables(const Term& t);
void collect_variables(const Term& t, std::vector<Term>& out);
bool occurs(const Term& var, const Term& t);
bool contains_subterm(const Term& t, const Term& sub);

/// Renames every variable by appending `suffix` to its name.
Term rename_variables(const Term& t, std::string_view suffix);

enum class KeyRole : std::uint8_t { SymKey, AsymPrivKey, SigKey, KdfInput };

std::string_view to_string(KeyRole role);

struct KeyPosition {
  Term key;
  KeyRole role;
  /// Protected payload (senc/aenc/sign) or the kdf application itself.
  Term payload;
};

/// Every subterm sitting in a key position, in pre-order.
std::vector<KeyPosition> key_positions(const Term& t);

class TermSyntaxError : public std::runtime_error {
 public:
  TermSyntaxError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses the shared surface syntax: ~x, $x, x, 'c', f(...), <...>.
Term parse_term(std::string_view text, const Signature& sig = Signature::builtin());

}  // namespace keyorder
