#include "keyorder/executor.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <functional>
#include <sstream>

namespace keyorder {

namespace {

void collect_constants(const Term& t, std::set<Term>& out) {
  if (t.kind() == TermKind::Constant) out.insert(t);
  for (const Term& a : t.args()) collect_constants(a, out);
}

Fact ground_fact(const Fact& f, const Substitution& s) {
  Fact g{f.name, f.persistent, {}, FactAnnotation::None};
  for (const Term& a : f.args) g.args.push_back(normalize(substitute(a, s)));
  return g;
}

bool fact_ground(const Fact& f) {
  return std::all_of(f.args.begin(), f.args.end(), [](const Term& t) { return t.is_ground(); });
}

bool matches_fact(const Fact& pattern, const Fact& ground, Substitution& s) {
  if (pattern.name != ground.name || pattern.persistent != ground.persistent ||
      pattern.args.size() != ground.args.size())
    return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match(substitute(pattern.args[i], s), ground.args[i], s)) return false;
  return true;
}

int premise_rank(const Fact& f) {
  if (f.is("Fr")) return 2;
  if (f.is("In")) return 1;
  return 0;
}

}  // namespace

int default_composition_depth(const Model& m) {
  int d = 0;
  for (const auto& r : m.rules) {
    for (const auto& f : r.premises)
      if (f.is("In"))
        for (const auto& a : f.args) d = std::max(d, a.depth());
    for (const auto& f : r.conclusions)
      if (f.is("Out"))
        for (const auto& a : f.args) d = std::max(d, a.depth());
  }
  return d + 2;
}

Executor::Executor(const Model& m, ExecOptions options)
    : m_(m),
      options_(options),
      depth_(options.composition_depth > 0 ? options.composition_depth : default_composition_depth(m)),
      replay_(std::any_of(m.restrictions.begin(), m.restrictions.end(), [](const Restriction& r) {
        return r.formula.find("Message(") != std::string::npos;
      })) {
  std::set<Term> cs;
  for (const auto& r : m.rules)
    for (const auto* facts : {&r.premises, &r.actions, &r.conclusions})
      for (const auto& f : *facts)
        for (const auto& a : f.args) collect_constants(a, cs);
  constants_.assign(cs.begin(), cs.end());
}

ExecutionState Executor::initial_state() const {
  ExecutionState s;
  s.knowledge = KnowledgeSet(depth_);
  return s;
}

std::vector<Substitution> Executor::resolve(const Term& pattern, const Substitution& s,
                                            const KnowledgeSet& k) const {
  Term q = substitute(pattern, s);
  if (q.is_ground()) {
    if (k.derivable(normalize(q))) return {s};
    return {};
  }
  // Bare variables are left for bind_free_in(), after sibling subterms
  // had the chance to constrain them.
  if (q.is_variable()) return {s};

  std::set<Substitution> out;
  for (const Term& v : k.with_head(q.name())) {
    Substitution e = s;
    if (match(q, v, e)) out.insert(std::move(e));
  }
  // Compose q from its arguments, structured arguments first.
  std::vector<std::size_t> order(q.arity());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return !q.arg(i).is_variable(); });
  std::vector<Substitution> cur{s};
  for (std::size_t i : order) {
    std::vector<Substitution> next;
    for (const auto& c : cur)
      for (auto& e : resolve(q.arg(i), c, k)) next.push_back(std::move(e));
    cur = std::move(next);
    if (cur.empty()) break;
  }
  for (auto& c : cur) out.insert(std::move(c));
  return {out.begin(), out.end()};
}

std::vector<Substitution> Executor::bind_free_in(const Term& pattern, const Substitution& s,
                                                 const KnowledgeSet& k) const {
  std::vector<Term> vars;
  collect_variables(substitute(pattern, s), vars);
  std::vector<Substitution> cur{s};
  for (const Term& v : vars) {
    std::vector<Term> values;
    switch (v.kind()) {
      case TermKind::FreshVar:
        values = {attacker_nonce()};
        break;
      case TermKind::PublicVar:
        values = constants_;
        break;
      default:
        values.assign(k.analyzed().begin(), k.analyzed().end());
        values.insert(values.end(), constants_.begin(), constants_.end());
        break;
    }
    std::vector<Substitution> next;
    for (const auto& c : cur)
      for (const Term& val : values) {
        Substitution e = c;
        if (match(v, val, e)) next.push_back(std::move(e));
      }
    cur = std::move(next);
  }
  std::erase_if(cur, [&](const Substitution& e) { return !k.derivable(normalize(substitute(pattern, e))); });
  return cur;
}

std::vector<Instance> Executor::instances(std::size_t rule, const ExecutionState& s,
                                          const Substitution& fixed) const {
  const RewriteRule& r = m_.rules.at(rule);
  std::vector<const Fact*> prems;
  for (const auto& f : r.premises) prems.push_back(&f);
  std::stable_sort(prems.begin(), prems.end(),
                   [](const Fact* a, const Fact* b) { return premise_rank(*a) < premise_rank(*b); });

  std::size_t fresh_needed = std::count_if(prems.begin(), prems.end(), [](const Fact* f) { return f->is("Fr"); });
  if (options_.fresh_budget != SIZE_MAX && s.fresh_minted + fresh_needed > options_.fresh_budget) return {};

  std::set<Fact> seen_messages;
  if (replay_)
    for (const auto& step : s.trace)
      for (const auto& a : step.actions)
        if (a.is("Message")) seen_messages.insert(a);

  std::vector<Instance> out;
  std::map<Fact, std::size_t> used;
  std::vector<Fact> consumed;
  std::vector<std::pair<std::string, std::size_t>> minted;

  auto finish = [&](const Substitution& sub) {
    Instance inst{rule, sub, consumed, {}, {}, minted};
    for (const auto& f : r.actions) inst.actions.push_back(ground_fact(f, sub));
    for (const auto& f : r.conclusions) inst.conclusions.push_back(ground_fact(f, sub));
    std::set<Fact> own_messages;
    for (const auto& a : inst.actions) {
      if (!fact_ground(a)) return;
      if ((a.is("Eq") || a.is("Neq")) && a.args.size() == 2 && (a.args[0] == a.args[1]) != a.is("Eq"))
        return;
      if (replay_ && a.is("Message") && (seen_messages.count(a) || !own_messages.insert(a).second)) return;
    }
    for (const auto& c : inst.conclusions)
      if (!fact_ground(c)) return;
    out.push_back(std::move(inst));
  };

  // Public variables that no premise binds range over the model's names.
  std::function<void(const Substitution&)> bind_free = [&](const Substitution& sub) {
    std::vector<Term> vars;
    for (const auto* facts : {&r.actions, &r.conclusions})
      for (const auto& f : *facts)
        for (const auto& a : f.args) collect_variables(substitute(a, sub), vars);
    auto pub = std::find_if(vars.begin(), vars.end(), [](const Term& v) { return v.kind() == TermKind::PublicVar; });
    if (pub == vars.end()) {
      finish(sub);
      return;
    }
    for (const Term& c : constants_) {
      Substitution e = sub;
      e.emplace(*pub, c);
      bind_free(e);
    }
  };

  std::function<void(std::size_t, const Substitution&)> step = [&](std::size_t i, const Substitution& sub) {
    if (i == prems.size()) {
      bind_free(sub);
      return;
    }
    const Fact& p = *prems[i];
    if (p.is("Fr")) {
      const Term& v = p.args.at(0);
      if (v.kind() != TermKind::FreshVar || sub.count(v)) return;
      std::size_t n = (s.fresh_counter.count(v.name()) ? s.fresh_counter.at(v.name()) : 0) + 1;
      Substitution e = sub;
      e.emplace(v, Term::fresh_name(v.name() + "." + std::to_string(n)));
      minted.emplace_back(v.name(), n);
      step(i + 1, e);
      minted.pop_back();
    } else if (p.is("In")) {
      for (const auto& r : resolve(p.args.at(0), sub, s.knowledge))
        for (const auto& e : bind_free_in(p.args.at(0), r, s.knowledge)) step(i + 1, e);
    } else if (p.persistent) {
      for (auto it = s.persistent.lower_bound(Fact{p.name, true, {}, FactAnnotation::None});
           it != s.persistent.end() && it->name == p.name; ++it) {
        Substitution e = sub;
        if (matches_fact(p, *it, e)) step(i + 1, e);
      }
    } else {
      for (auto it = s.linear.lower_bound(Fact{p.name, false, {}, FactAnnotation::None});
           it != s.linear.end() && it->first.name == p.name; ++it) {
        if (used[it->first] >= it->second) continue;
        Substitution e = sub;
        if (!matches_fact(p, it->first, e)) continue;
        ++used[it->first];
        consumed.push_back(it->first);
        step(i + 1, e);
        consumed.pop_back();
        --used[it->first];
      }
    }
  };
  step(0, fixed);
  return out;
}

ExecutionState Executor::fire(const ExecutionState& s, const Instance& inst) const {
  ExecutionState n = s;
  for (const auto& f : inst.consumed) {
    auto it = n.linear.find(f);
    assert(it != n.linear.end());
    if (--it->second == 0) n.linear.erase(it);
  }
  for (const auto& [name, idx] : inst.minted) {
    n.fresh_counter[name] = idx;
    ++n.fresh_minted;
  }
  for (const auto& c : inst.conclusions) {
    assert(std::all_of(c.args.begin(), c.args.end(), [](const Term& t) { return is_normal(t); }));
    if (c.is("Out")) {
      for (const auto& a : c.args) {
        n.knowledge.add(a);
        n.outputs.push_back(a);
      }
    } else if (c.persistent) {
      n.persistent.insert(c);
    } else {
      ++n.linear[c];
    }
  }
  n.trace.push_back({n.trace.size() + 1, m_.rules[inst.rule].name, inst.subst, inst.actions});
  return n;
}

// ---------------------------------------------------------------- scenarios

StuckScenario::StuckScenario(std::size_t step, std::string rule)
    : std::runtime_error("scenario stuck at step " + std::to_string(step) + ": no applicable instance of " +
                         rule),
      step_(step),
      rule_(std::move(rule)) {}

std::vector<ScenarioStep> parse_scenario(std::string_view text) {
  std::vector<ScenarioStep> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    ScenarioStep st;
    st.line = lineno;
    if (!(words >> st.rule)) continue;
    std::string b;
    while (words >> b) {
      auto eq = b.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == b.size())
        throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": expected var=term, got '" +
                                    b + "'");
      Term var = parse_term(b.substr(0, eq));
      Term val = parse_term(b.substr(eq + 1));
      if (!var.is_variable() || !val.is_ground() || !sort_admits(var.kind(), val))
        throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": invalid binding '" + b + "'");
      st.bindings.insert_or_assign(var, val);
    }
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<ScenarioStep> load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ExecutionState run_scenario(const Model& m, const std::vector<ScenarioStep>& script, ExecOptions options) {
  Executor ex(m, options);
  ExecutionState s = ex.initial_state();
  for (std::size_t i = 0; i < script.size(); ++i) {
    const RewriteRule* r = m.find_rule(script[i].rule);
    if (!r) throw std::invalid_argument("scenario step " + std::to_string(i + 1) + ": unknown rule " + script[i].rule);
    auto insts = ex.instances(static_cast<std::size_t>(r - m.rules.data()), s, script[i].bindings);
    if (insts.empty()) throw StuckScenario(i + 1, script[i].rule);
    s = ex.fire(s, insts.front());
  }
  return s;
}

}  // namespace keyorder
