#include <map>
#include <set>

#include "keyorder/model.hpp"

namespace keyorder {

std::string to_string(const Diagnostic& d) {
  std::string out = d.severity == Severity::Error ? "error" : "warning";
  if (!d.rule.empty()) out += " [" + d.rule + "]";
  return out + ": " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics)
    if (d.severity == Severity::Error) return true;
  return false;
}

namespace {

const std::map<std::string, std::size_t, std::less<>>& builtin_fact_arity() {
  static const std::map<std::string, std::size_t, std::less<>> table = {
      {"Fr", 1}, {"In", 1}, {"Out", 1}, {"K", 1}};
  return table;
}

struct FactUse {
  std::size_t arity;
  bool persistent;
  std::string rule;
};

void check_placement(const RewriteRule& r, std::vector<Diagnostic>& out) {
  auto err = [&](std::string msg) { out.push_back({r.name, Severity::Error, std::move(msg)}); };
  for (const Fact& f : r.premises) {
    if (f.is("Out")) err("Out not allowed in premise");
    if (f.is("K")) err("K not allowed in rules");
    if (f.is("Fr") && f.args.size() == 1 && f.args[0].kind() != TermKind::FreshVar)
      err("Fr must bind a fresh variable, got " + to_string(f.args[0]));
    if ((f.is("Fr") || f.is("In")) && f.persistent) err(f.name + " cannot be persistent");
  }
  for (const Fact& f : r.actions) {
    if (f.is("In") || f.is("Out") || f.is("Fr")) err(f.name + " not allowed in actions");
    if (f.is("K")) err("K not allowed in rules");
  }
  for (const Fact& f : r.conclusions) {
    if (f.is("In")) err("In not allowed in conclusion");
    if (f.is("Fr")) err("Fr not allowed in conclusion");
    if (f.is("K")) err("K not allowed in rules");
    if (f.is("Out") && f.persistent) err("Out cannot be persistent");
  }
}

void check_variables(const RewriteRule& r, std::vector<Diagnostic>& out) {
  std::vector<Term> bound;
  for (const Fact& f : r.premises)
    for (const Term& t : f.args) collect_variables(t, bound);
  std::set<Term> bound_set(bound.begin(), bound.end());

  std::vector<Term> used;
  for (const auto* list : {&r.actions, &r.conclusions})
    for (const Fact& f : *list)
      for (const Term& t : f.args) collect_variables(t, used);
  for (const Term& v : used) {
    // Free public variables range over public names.
    if (v.kind() == TermKind::PublicVar || bound_set.count(v)) continue;
    out.push_back({r.name, Severity::Error,
                   "free variable '" + to_string(v) + "' in conclusions or actions"});
  }

  std::map<std::string, std::set<TermKind>> sorts;
  for (const Term& v : bound) sorts[v.name()].insert(v.kind());
  for (const Term& v : used) sorts[v.name()].insert(v.kind());
  for (const auto& [name, kinds] : sorts) {
    if (kinds.count(TermKind::FreshVar) && kinds.count(TermKind::PublicVar)) {
      out.push_back({r.name, Severity::Error,
                     "variable name '" + name + "' used with both fresh and public sort"});
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Model& m) {
  std::vector<Diagnostic> out;

  std::set<std::string> rule_names;
  for (const RewriteRule& r : m.rules) {
    if (!rule_names.insert(r.name).second)
      out.push_back({r.name, Severity::Error, "duplicate rule name '" + r.name + "'"});
  }
  std::set<std::string> lemma_names;
  for (const Lemma& l : m.lemmas) {
    if (!lemma_names.insert(l.name).second)
      out.push_back({"", Severity::Error, "duplicate lemma name '" + l.name + "'"});
  }

  std::map<std::string, FactUse> facts;
  std::set<std::string> reported;
  for (const RewriteRule& r : m.rules) {
    check_placement(r, out);
    check_variables(r, out);
    for (const auto* list : {&r.premises, &r.actions, &r.conclusions}) {
      for (const Fact& f : *list) {
        auto b = builtin_fact_arity().find(f.name);
        if (b != builtin_fact_arity().end() && b->second != f.args.size()) {
          out.push_back({r.name, Severity::Error,
                         "builtin fact " + f.name + " has arity " + std::to_string(b->second) +
                             ", got " + std::to_string(f.args.size())});
          continue;
        }
        auto [it, inserted] = facts.emplace(f.name, FactUse{f.args.size(), f.persistent, r.name});
        if (inserted) continue;
        if (it->second.arity != f.args.size() && reported.insert("arity:" + f.name).second) {
          out.push_back({r.name, Severity::Error,
                         "arity conflict for fact '" + f.name + "': " +
                             std::to_string(it->second.arity) + " (rule " + it->second.rule +
                             ") vs " + std::to_string(f.args.size())});
        }
        if (it->second.persistent != f.persistent && reported.insert("persist:" + f.name).second) {
          out.push_back({r.name, Severity::Error,
                         "fact '" + f.name + "' used both as persistent and linear"});
        }
      }
    }
  }
  return out;
}

}  // namespace keyorder
