#include "keyorder/term.hpp"

#include <algorithm>
#include <functional>
#include <ostream>
#include <sstream>

#include "cursor.hpp"

namespace keyorder {

struct Term::Node {
  TermKind kind;
  std::string name;
  std::vector<Term> args;
  std::size_t hash = 0;
  int depth = 1;
  std::size_t size = 1;
  bool ground = true;
};

Term Term::make(TermKind kind, std::string name, std::vector<Term> args) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->name = std::move(name);
  node->args = std::move(args);
  std::size_t h = std::hash<std::string>{}(node->name) * 31 + static_cast<std::size_t>(kind);
  node->ground = kind == TermKind::Constant || kind == TermKind::FreshName || kind == TermKind::Apply;
  for (const Term& a : node->args) {
    h = h * 1000003u ^ a.hash();
    node->depth = std::max(node->depth, a.depth() + 1);
    node->size += a.size();
    node->ground = node->ground && a.is_ground();
  }
  node->hash = h;
  return Term(std::move(node));
}

Term Term::fresh_var(std::string name) { return make(TermKind::FreshVar, std::move(name), {}); }
Term Term::public_var(std::string name) { return make(TermKind::PublicVar, std::move(name), {}); }
Term Term::msg_var(std::string name) { return make(TermKind::MsgVar, std::move(name), {}); }
Term Term::constant(std::string name) { return make(TermKind::Constant, std::move(name), {}); }
Term Term::fresh_name(std::string name) { return make(TermKind::FreshName, std::move(name), {}); }
Term Term::apply(std::string symbol, std::vector<Term> args) {
  return make(TermKind::Apply, std::move(symbol), std::move(args));
}

Term Term::tuple(std::vector<Term> items) {
  if (items.empty()) throw std::invalid_argument("empty tuple");
  Term acc = items.back();
  for (std::size_t i = items.size() - 1; i-- > 0;) acc = apply("pair", {items[i], acc});
  return acc;
}

TermKind Term::kind() const { return node_->kind; }
const std::string& Term::name() const { return node_->name; }
std::span<const Term> Term::args() const { return node_->args; }
bool Term::is_variable() const {
  auto k = kind();
  return k == TermKind::FreshVar || k == TermKind::PublicVar || k == TermKind::MsgVar;
}
bool Term::is_apply(std::string_view symbol) const {
  return kind() == TermKind::Apply && node_->name == symbol;
}
bool Term::is_ground() const { return node_->ground; }
std::size_t Term::hash() const { return node_->hash; }
int Term::depth() const { return node_->depth; }
std::size_t Term::size() const { return node_->size; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.name() != b.name()) return false;
  auto aa = a.args();
  auto ba = b.args();
  return std::equal(aa.begin(), aa.end(), ba.begin(), ba.end());
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.name().compare(b.name()); c != 0) return c < 0 ? std::strong_ordering::less
                                                                 : std::strong_ordering::greater;
  auto aa = a.args();
  auto ba = b.args();
  return std::lexicographical_compare_three_way(aa.begin(), aa.end(), ba.begin(), ba.end());
}

namespace {

void print(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case TermKind::FreshVar: os << '~' << t.name(); return;
    case TermKind::PublicVar: os << '$' << t.name(); return;
    case TermKind::MsgVar: os << t.name(); return;
    case TermKind::Constant: os << '\'' << t.name() << '\''; return;
    case TermKind::FreshName: os << '~' << t.name(); return;
    case TermKind::Apply: break;
  }
  if (t.is_apply("pair") && t.arity() == 2) {
    os << '<';
    const Term* cur = &t;
    bool first = true;
    while (cur->is_apply("pair") && cur->arity() == 2) {
      if (!first) os << ", ";
      print(os, cur->arg(0));
      first = false;
      cur = &cur->arg(1);
    }
    os << ", ";
    print(os, *cur);
    os << '>';
    return;
  }
  os << t.name();
  if (t.arity() == 0) return;
  os << '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) os << ", ";
    print(os, t.arg(i));
  }
  os << ')';
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print(os, t);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Term& t) {
  print(os, t);
  return os;
}

// ---------------------------------------------------------------------------
// Signature

namespace {
const std::map<std::string, std::size_t, std::less<>>& builtin_arities() {
  static const std::map<std::string, std::size_t, std::less<>> table = {
      {"senc", 2}, {"sdec", 2}, {"aenc", 2}, {"adec", 2}, {"pk", 1},  {"sign", 2}, {"verify", 3},
      {"h", 1},    {"kdf", 2},  {"pair", 2}, {"fst", 1},  {"snd", 1}, {"true", 0},
  };
  return table;
}
}  // namespace

Signature::Signature() : arities_(builtin_arities()) {}

const Signature& Signature::builtin() {
  static const Signature sig;
  return sig;
}

bool Signature::declare(const std::string& symbol, std::size_t arity) {
  auto [it, inserted] = arities_.emplace(symbol, arity);
  return inserted || it->second == arity;
}

std::optional<std::size_t> Signature::arity(std::string_view symbol) const {
  auto it = arities_.find(symbol);
  if (it == arities_.end()) return std::nullopt;
  return it->second;
}

bool Signature::is_builtin(std::string_view symbol) {
  return builtin_arities().find(symbol) != builtin_arities().end();
}

// ---------------------------------------------------------------------------
// Substitution and unification

Term substitute(const Term& t, const Substitution& s) {
  if (s.empty() || t.is_ground()) return t;
  if (t.is_variable()) {
    auto it = s.find(t);
    return it == s.end() ? t : it->second;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(substitute(a, s));
    changed = changed || !(args.back() == a);
  }
  return changed ? Term::apply(t.name(), std::move(args)) : t;
}

Substitution compose(const Substitution& s1, const Substitution& s2) {
  Substitution out;
  for (const auto& [v, t] : s1) out.emplace(v, substitute(t, s2));
  for (const auto& [v, t] : s2) out.emplace(v, t);
  for (auto it = out.begin(); it != out.end();) {
    it = it->first == it->second ? out.erase(it) : std::next(it);
  }
  return out;
}

bool occurs(const Term& var, const Term& t) {
  if (t == var) return true;
  for (const Term& a : t.args())
    if (occurs(var, a)) return true;
  return false;
}

bool contains_subterm(const Term& t, const Term& sub) { return occurs(sub, t); }

bool sort_admits(TermKind var_kind, const Term& t) {
  switch (var_kind) {
    case TermKind::MsgVar: return true;
    case TermKind::FreshVar: return t.kind() == TermKind::FreshVar || t.kind() == TermKind::FreshName;
    case TermKind::PublicVar: return t.kind() == TermKind::PublicVar || t.kind() == TermKind::Constant;
    default: return false;
  }
}

namespace {

Term resolve(const Term& t, const Substitution& s) {
  Term cur = t;
  while (cur.is_variable()) {
    auto it = s.find(cur);
    if (it == s.end()) break;
    cur = it->second;
  }
  return cur;
}

bool occurs_resolved(const Term& var, const Term& t0, const Substitution& s) {
  Term t = resolve(t0, s);
  if (t == var) return true;
  for (const Term& a : t.args())
    if (occurs_resolved(var, a, s)) return true;
  return false;
}

// Triangular-form bindings; made idempotent by the caller.
bool unify_step(const Term& a0, const Term& b0, Substitution& s) {
  Term a = resolve(a0, s);
  Term b = resolve(b0, s);
  if (a == b) return true;
  if (a.is_variable() || b.is_variable()) {
    // Bind the more general variable: msg over fresh/public.
    const Term* var = nullptr;
    const Term* val = nullptr;
    if (a.is_variable() && sort_admits(a.kind(), b)) {
      var = &a, val = &b;
    } else if (b.is_variable() && sort_admits(b.kind(), a)) {
      var = &b, val = &a;
    }
    if (var && val->is_variable() && var->kind() != TermKind::MsgVar &&
        val->kind() == TermKind::MsgVar) {
      std::swap(var, val);
    }
    if (!var) return false;
    if (occurs_resolved(*var, *val, s)) return false;
    s.insert_or_assign(*var, *val);
    return true;
  }
  if (a.kind() != b.kind() || a.name() != b.name() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (!unify_step(a.arg(i), b.arg(i), s)) return false;
  return true;
}

Substitution solve(const Substitution& triangular) {
  Substitution out;
  std::function<Term(const Term&)> full = [&](const Term& t) -> Term {
    if (t.is_ground()) return t;
    if (t.is_variable()) {
      auto it = triangular.find(t);
      return it == triangular.end() ? t : full(it->second);
    }
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(full(a));
    return Term::apply(t.name(), std::move(args));
  };
  for (const auto& [v, _] : triangular) {
    Term img = full(v);
    if (!(img == v)) out.emplace(v, img);
  }
  return out;
}

}  // namespace

bool unify_into(const Term& t1, const Term& t2, Substitution& s) {
  Substitution work = s;
  if (!unify_step(t1, t2, work)) return false;
  s = solve(work);
  return true;
}

std::optional<Substitution> unify(const Term& t1, const Term& t2) {
  Substitution s;
  if (!unify_into(t1, t2, s)) return std::nullopt;
  return s;
}

bool match(const Term& pattern, const Term& ground, Substitution& s) {
  if (pattern.is_ground()) return pattern == ground;
  if (pattern.is_variable()) {
    auto it = s.find(pattern);
    if (it != s.end()) return it->second == ground;
    if (!sort_admits(pattern.kind(), ground)) return false;
    s.emplace(pattern, ground);
    return true;
  }
  if (ground.kind() != TermKind::Apply || ground.name() != pattern.name() ||
      ground.arity() != pattern.arity()) {
    return false;
  }
  for (std::size_t i = 0; i < pattern.arity(); ++i)
    if (!match(pattern.arg(i), ground.arg(i), s)) return false;
  return true;
}

void collect_variables(const Term& t, std::vector<Term>& out) {
  if (t.is_ground()) return;
  if (t.is_variable()) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    return;
  }
  for (const Term& a : t.args()) collect_variables(a, out);
}

std::vector<Term> variables(const Term& t) {
  std::vector<Term> out;
  collect_variables(t, out);
  return out;
}

Term rename_variables(const Term& t, std::string_view suffix) {
  if (t.is_ground()) return t;
  switch (t.kind()) {
    case TermKind::FreshVar: return Term::fresh_var(t.name() + std::string(suffix));
    case TermKind::PublicVar: return Term::public_var(t.name() + std::string(suffix));
    case TermKind::MsgVar: return Term::msg_var(t.name() + std::string(suffix));
    default: break;
  }
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(rename_variables(a, suffix));
  return Term::apply(t.name(), std::move(args));
}

// ---------------------------------------------------------------------------
// Equational theory

namespace {

const Term& true_term() {
  static const Term t = Term::apply("true");
  return t;
}

std::optional<Term> rewrite_root(const Term& t) {
  if (!t.is_apply()) return std::nullopt;
  const std::string& f = t.name();
  if (f == "sdec" && t.arity() == 2) {
    const Term& c = t.arg(0);
    if (c.is_apply("senc") && c.arg(1) == t.arg(1)) return c.arg(0);
  } else if (f == "adec" && t.arity() == 2) {
    const Term& c = t.arg(0);
    if (c.is_apply("aenc") && c.arg(1).is_apply("pk") && c.arg(1).arg(0) == t.arg(1)) return c.arg(0);
  } else if (f == "fst" && t.arity() == 1) {
    if (t.arg(0).is_apply("pair")) return t.arg(0).arg(0);
  } else if (f == "snd" && t.arity() == 1) {
    if (t.arg(0).is_apply("pair")) return t.arg(0).arg(1);
  } else if (f == "verify" && t.arity() == 3) {
    const Term& sig = t.arg(0);
    if (sig.is_apply("sign") && sig.arg(0) == t.arg(1) && t.arg(2).is_apply("pk") &&
        t.arg(2).arg(0) == sig.arg(1)) {
      return true_term();
    }
  }
  return std::nullopt;
}

}  // namespace

Term normalize(const Term& t) {
  if (!t.is_apply() || t.arity() == 0) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(normalize(a));
    changed = changed || !(args.back() == a);
  }
  Term rebuilt = changed ? Term::apply(t.name(), std::move(args)) : t;
  // Every rewrite yields a subterm of normal arguments or `true`.
  if (auto r = rewrite_root(rebuilt)) return *r;
  return rebuilt;
}

bool is_normal(const Term& t) {
  if (rewrite_root(t)) return false;
  for (const Term& a : t.args())
    if (!is_normal(a)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Key positions

std::string_view to_string(KeyRole role) {
  switch (role) {
    case KeyRole::SymKey: return "SymKey";
    case KeyRole::AsymPrivKey: return "AsymPrivKey";
    case KeyRole::SigKey: return "SigKey";
    case KeyRole::KdfInput: return "KdfInput";
  }
  return "?";
}

namespace {
void scan_keys(const Term& t, std::vector<KeyPosition>& out) {
  if (!t.is_apply()) return;
  if (t.is_apply("senc") && t.arity() == 2) {
    out.push_back({t.arg(1), KeyRole::SymKey, t.arg(0)});
  } else if (t.is_apply("aenc") && t.arity() == 2 && t.arg(1).is_apply("pk")) {
    out.push_back({t.arg(1).arg(0), KeyRole::AsymPrivKey, t.arg(0)});
  } else if (t.is_apply("sign") && t.arity() == 2) {
    out.push_back({t.arg(1), KeyRole::SigKey, t.arg(0)});
  } else if (t.is_apply("kdf") && t.arity() == 2) {
    out.push_back({t.arg(0), KeyRole::KdfInput, t});
    out.push_back({t.arg(1), KeyRole::KdfInput, t});
  }
  for (const Term& a : t.args()) scan_keys(a, out);
}
}  // namespace

std::vector<KeyPosition> key_positions(const Term& t) {
  std::vector<KeyPosition> out;
  scan_keys(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

TermSyntaxError::TermSyntaxError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace detail {

namespace {
Term parse_primary(Cursor& cur, const Signature& sig) {
  char c = cur.peek();
  if (c == '~') {
    cur.expect("~");
    return Term::fresh_var(cur.identifier());
  }
  if (c == '$') {
    cur.expect("$");
    return Term::public_var(cur.identifier());
  }
  if (c == '\'') return Term::constant(cur.quoted('\''));
  if (c == '<') {
    cur.expect("<");
    std::vector<Term> items{parse_term_at(cur, sig)};
    while (cur.accept(",")) items.push_back(parse_term_at(cur, sig));
    cur.expect(">");
    if (items.size() < 2) cur.fail("tuple needs at least two elements");
    return Term::tuple(std::move(items));
  }
  if (!cur.at_identifier()) cur.fail("expected term");
  int line = cur.line(), col = cur.column();
  std::string id = cur.identifier();
  if (cur.peek_raw() == '(') {
    cur.expect("(");
    std::vector<Term> args;
    if (!cur.accept(")")) {
      args.push_back(parse_term_at(cur, sig));
      while (cur.accept(",")) args.push_back(parse_term_at(cur, sig));
      cur.expect(")");
    }
    auto arity = sig.arity(id);
    if (!arity) throw TermSyntaxError("unknown function symbol '" + id + "'", line, col);
    if (*arity != args.size()) {
      throw TermSyntaxError("symbol '" + id + "' expects " + std::to_string(*arity) +
                                " argument(s), got " + std::to_string(args.size()),
                            line, col);
    }
    return Term::apply(id, std::move(args));
  }
  if (auto arity = sig.arity(id); arity && *arity == 0) return Term::apply(id);
  return Term::msg_var(id);
}
}  // namespace

Term parse_term_at(Cursor& cur, const Signature& sig) {
  Term t = parse_primary(cur, sig);
  if (cur.peek() == '+') cur.fail("multiset union '+' is not supported");
  return t;
}

}  // namespace detail

Term parse_term(std::string_view text, const Signature& sig) {
  detail::Cursor cur(text);
  Term t = detail::parse_term_at(cur, sig);
  if (!cur.eof()) cur.fail("trailing input after term");
  return t;
}

}  // namespace keyorder
