#include <algorithm>

#include "keyorder/executor.hpp"

namespace keyorder {

bool check_replay_restriction(const Trace& t) {
  std::set<Fact> seen;
  for (const auto& step : t) {
    std::set<Fact> here;
    for (const auto& a : step.actions)
      if (a.is("Message")) here.insert(a);
    for (const auto& a : here)
      if (!seen.insert(a).second) return false;
  }
  return true;
}

namespace {

std::set<Term> honest_parties(const Trace& t, const Term* who = nullptr) {
  std::set<Term> out;
  for (const auto& step : t)
    for (const auto& a : step.actions)
      if (a.is("Honest") && a.args.size() == 2 && (!who || a.args[0] == *who)) out.insert(a.args[1]);
  return out;
}

std::string label_text(const Term& t) { return t.kind() == TermKind::Constant ? t.name() : to_string(t); }

}  // namespace

std::vector<Violation> check_secrecy(const Trace& t, const KnowledgeSet& k, const KeyClassDag* dag) {
  std::vector<std::vector<bool>> cl;
  if (dag) cl = closure(*dag);
  auto depends = [&](const std::string& c, const std::string& on) {
    if (c == on) return true;
    if (!dag) return false;
    auto a = dag->find(c), b = dag->find(on);
    return a && b && cl[*a][*b];
  };

  std::vector<Violation> out;
  for (const auto& step : t)
    for (const auto& a : step.actions) {
      if (!a.name.starts_with("Secret_") || a.args.size() < 2) continue;
      const Term& x = a.args.back();
      if (!k.derivable(x)) continue;
      const std::string cls = a.name.substr(7);
      std::set<Term> honest = honest_parties(t, &a.args[0]);
      bool excused = false;
      for (const auto& s2 : t)
        for (const auto& r : s2.actions)
          if (r.is("Rev") && r.args.size() == 3 && honest.count(r.args[1]) && depends(cls, label_text(r.args[0])))
            excused = true;
      if (!excused)
        out.push_back({"secrecy", step.step, a, to_string(x) + " is derivable by the attacker"});
    }
  return out;
}

std::string_view to_string(Agreement a) {
  switch (a) {
    case Agreement::Aliveness: return "aliveness";
    case Agreement::WeakAgreement: return "weak-agreement";
    case Agreement::NonInjectiveAgreement: return "noninjective-agreement";
  }
  return "?";
}

std::optional<Agreement> parse_agreement(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "aliveness") return Agreement::Aliveness;
  if (n == "weak-agreement") return Agreement::WeakAgreement;
  if (n == "noninjective-agreement" || n == "non-injective-agreement") return Agreement::NonInjectiveAgreement;
  return std::nullopt;
}

std::vector<Violation> check_agreement(const Trace& t, Agreement kind) {
  std::set<Term> honest = honest_parties(t);
  for (const auto& step : t)
    for (const auto& a : step.actions)
      if (a.is("Rev") && a.args.size() == 3 && honest.count(a.args[1])) return {};

  std::vector<Violation> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (const auto& c : t[i].actions) {
      if (!c.is("Commit") || c.args.size() != 3 || !honest.count(c.args[1])) continue;
      const Term &n = c.args[0], &m = c.args[1], &data = c.args[2];
      bool ok = false;
      for (std::size_t j = 0; j < i && !ok; ++j)
        for (const auto& a : t[j].actions) {
          bool running = a.is("Running") && a.args.size() == 3 && a.args[0] == m && a.args[1] == n;
          if ((kind == Agreement::Aliveness && !a.args.empty() && a.args[0] == m) ||
              (kind == Agreement::WeakAgreement && running) ||
              (kind == Agreement::NonInjectiveAgreement && running && a.args[2] == data)) {
            ok = true;
            break;
          }
        }
      if (!ok)
        out.push_back({std::string(to_string(kind)), t[i].step, c,
                       "no matching prior action by " + to_string(m)});
    }
  return out;
}

}  // namespace keyorder
