#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "keyorder/key_dependency.hpp"

namespace keyorder {

std::string_view to_string(KeyKind kind) {
  switch (kind) {
    case KeyKind::SymKey: return "SymKey";
    case KeyKind::AsymPrivKey: return "AsymPrivKey";
    case KeyKind::SigKey: return "SigKey";
    case KeyKind::KdfInput: return "KdfInput";
    case KeyKind::Carried: return "Carried";
    case KeyKind::SecrecyTarget: return "SecrecyTarget";
  }
  return "?";
}

std::string_view to_string(DependencyKind kind) {
  return kind == DependencyKind::Secrecy ? "Secrecy" : "Authenticity";
}

namespace {

KeyKind kind_of(KeyRole role) {
  switch (role) {
    case KeyRole::SymKey: return KeyKind::SymKey;
    case KeyRole::AsymPrivKey: return KeyKind::AsymPrivKey;
    case KeyRole::SigKey: return KeyKind::SigKey;
    case KeyRole::KdfInput: return KeyKind::KdfInput;
  }
  return KeyKind::Carried;
}

std::string node_label(const Term& t) {
  if (t.is_variable()) return t.name();
  return to_string(t);
}

template <typename F>
void for_each_subterm(const Term& t, F&& f) {
  f(t);
  for (const Term& a : t.args()) for_each_subterm(a, f);
}

/// Terms of a rule that are inspected for key occurrences.
std::vector<Term> rule_terms(const RewriteRule& r) {
  std::vector<Term> out;
  for (const auto* list : {&r.premises, &r.conclusions})
    for (const Fact& f : *list) {
      if (f.is("Fr")) continue;
      for (const Term& t : f.args) out.push_back(normalize(t));
    }
  return out;
}

class RuleNodes {
 public:
  RuleNodes(std::size_t rule, const RewriteRule& r, std::vector<KeyNode>& out)
      : rule_(rule), r_(r), out_(out) {
    for (const Fact& f : r.premises)
      if (f.is("Fr") && f.args.size() == 1) fresh_bound_.insert(f.args[0]);
  }

  void add(const Term& t, KeyKind kind) {
    auto it = index_.find(t);
    if (it != index_.end()) {
      KeyNode& n = out_[it->second];
      if (n.kind == KeyKind::Carried && kind != KeyKind::Carried) n.kind = kind;
      return;
    }
    index_.emplace(t, out_.size());
    out_.push_back({rule_, r_.name, t, node_label(t), kind, fresh_bound_.count(t) > 0});
  }

  void mark_secret(const Term& t) {
    if (auto it = index_.find(t); it != index_.end() && out_[it->second].kind == KeyKind::Carried)
      out_[it->second].kind = KeyKind::SecrecyTarget;
  }

  void add_carried(const Term& payload) {
    for_each_subterm(payload, [&](const Term& s) {
      if (s.kind() == TermKind::FreshVar || s.kind() == TermKind::MsgVar || s.is_apply("kdf"))
        add(s, KeyKind::Carried);
    });
  }

 private:
  std::size_t rule_;
  const RewriteRule& r_;
  std::vector<KeyNode>& out_;
  std::set<Term> fresh_bound_;
  std::map<Term, std::size_t> index_;
};

/// (rule, term) -> node index.
using NodeIndex = std::map<std::pair<std::size_t, Term>, std::size_t>;

NodeIndex index_nodes(const std::vector<KeyNode>& nodes) {
  NodeIndex idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) idx.emplace(std::pair{nodes[i].rule, nodes[i].occurrence}, i);
  return idx;
}

/// Leaves of a payload reachable through pair components only.
void pair_leaves(const Term& t, std::vector<Term>& out) {
  if (t.is_apply("pair")) {
    pair_leaves(t.arg(0), out);
    pair_leaves(t.arg(1), out);
  } else {
    out.push_back(t);
  }
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void merge(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

bool facts_correspond(const Fact& concl, const Fact& prem) {
  if (concl.is("Out") && prem.is("In")) return true;
  if (concl.is("Fr") || concl.is("Out") || prem.is("In")) return false;
  return concl.name == prem.name && concl.persistent == prem.persistent &&
         concl.args.size() == prem.args.size();
}

}  // namespace

std::vector<KeyNode> collect_key_nodes(const Model& m) {
  std::vector<KeyNode> out;
  for (std::size_t ri = 0; ri < m.rules.size(); ++ri) {
    RuleNodes rn(ri, m.rules[ri], out);
    std::vector<Term> terms = rule_terms(m.rules[ri]);
    for (const Term& t : terms)
      for (const KeyPosition& kp : key_positions(t)) rn.add(kp.key, kind_of(kp.role));
    for (const Term& t : terms)
      for_each_subterm(t, [&](const Term& s) {
        if (s.is_apply("pk")) rn.add(s.arg(0), KeyKind::SigKey);
      });
    for (const Term& t : terms)
      for (const KeyPosition& kp : key_positions(t))
        if (kp.role != KeyRole::KdfInput) rn.add_carried(kp.payload);
    for (const Fact& a : m.rules[ri].actions)
      if (a.name.starts_with("Secret_") && !a.args.empty()) rn.mark_secret(a.args.back());
  }
  return out;
}

std::vector<DependencyEdge> extract_edges(const Model& m, const std::vector<KeyNode>& nodes,
                                          ExtractOptions options,
                                          std::vector<std::string>* warnings) {
  NodeIndex idx = index_nodes(nodes);
  std::vector<DependencyEdge> edges;
  auto node = [&](std::size_t ri, const Term& t) -> std::optional<std::size_t> {
    auto it = idx.find({ri, t});
    if (it == idx.end()) return std::nullopt;
    return it->second;
  };
  auto depends_on_all_inside = [&](std::size_t ri, const Term& payload, std::size_t key,
                                   DependencyKind kind) {
    for_each_subterm(payload, [&](const Term& s) {
      if (auto n = node(ri, s); n && *n != key) edges.push_back({*n, key, kind});
    });
  };

  for (std::size_t ri = 0; ri < m.rules.size(); ++ri) {
    for (const Fact& f : m.rules[ri].conclusions) {
      if (!f.is("Out")) continue;
      for_each_subterm(normalize(f.args.at(0)), [&](const Term& s) {
        std::optional<Term> key, payload;
        if (s.is_apply("senc")) {
          key = s.arg(1), payload = s.arg(0);
        } else if (s.is_apply("aenc") && s.arg(1).is_apply("pk")) {
          key = s.arg(1).arg(0), payload = s.arg(0);
        }
        if (key) {
          auto k = node(ri, *key);
          if (!k) return;
          std::vector<Term> leaves;
          pair_leaves(*payload, leaves);
          for (const Term& leaf : leaves)
            if (auto n = node(ri, leaf); n && *n != *k)
              edges.push_back({*n, *k, DependencyKind::Secrecy});
          if (options.extended_authenticity)
            depends_on_all_inside(ri, *payload, *k, DependencyKind::Authenticity);
        }
        if (s.is_apply("sign")) {
          if (auto k = node(ri, s.arg(1)))
            depends_on_all_inside(ri, s.arg(0), *k, DependencyKind::Authenticity);
        }
      });
    }
  }

  // Rule 3: a derived key depends on each of its inputs.
  std::set<std::string> warned;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Term& t = nodes[i].occurrence;
    if (!t.is_apply("kdf")) continue;
    for (const Term& input : t.args())
      if (auto n = node(nodes[i].rule, input)) edges.push_back({i, *n, DependencyKind::Secrecy});
    std::string w = "rule " + nodes[i].rule_name + ": " + to_string(t) +
                    " approximated as depending on each input separately";
    if (warnings && warned.insert(w).second) warnings->push_back(w);
  }

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::size_t> unify_equivalent_keys(const Model& m, const std::vector<KeyNode>& nodes) {
  // Elements are node occurrences plus every variable occurrence, so keys
  // passed through intermediate state facts still link up.
  std::map<std::pair<std::size_t, Term>, std::size_t> element;
  std::vector<std::vector<std::pair<Term, std::size_t>>> per_rule(m.rules.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    element.emplace(std::pair{nodes[i].rule, nodes[i].occurrence}, i);
    per_rule[nodes[i].rule].emplace_back(nodes[i].occurrence, i);
  }
  for (std::size_t ri = 0; ri < m.rules.size(); ++ri) {
    std::vector<Term> vars;
    for (const auto* list : {&m.rules[ri].premises, &m.rules[ri].actions, &m.rules[ri].conclusions})
      for (const Fact& f : *list)
        for (const Term& t : f.args) collect_variables(t, vars);
    for (const Term& v : vars) {
      auto [it, inserted] = element.emplace(std::pair{ri, v}, element.size());
      if (inserted) per_rule[ri].emplace_back(v, it->second);
    }
  }

  UnionFind uf(element.size());
  for (std::size_t a = 0; a < m.rules.size(); ++a) {
    for (const Fact& c : m.rules[a].conclusions) {
      for (std::size_t b = 0; b < m.rules.size(); ++b) {
        for (const Fact& p : m.rules[b].premises) {
          if (!facts_correspond(c, p)) continue;
          Substitution s;
          bool ok = true;
          for (std::size_t i = 0; ok && i < c.args.size(); ++i)
            ok = unify_into(rename_variables(c.args[i], "@c"), rename_variables(p.args[i], "@p"), s);
          if (!ok) continue;
          std::map<Term, std::vector<std::size_t>> by_image;
          for (const auto& [t, e] : per_rule[a])
            by_image[substitute(rename_variables(t, "@c"), s)].push_back(e);
          for (const auto& [t, e] : per_rule[b])
            by_image[substitute(rename_variables(t, "@p"), s)].push_back(e);
          for (const auto& [img, group] : by_image)
            for (std::size_t e : group) uf.merge(group.front(), e);
        }
      }
    }
  }

  std::vector<std::size_t> partition(nodes.size());
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto [it, inserted] = dense.emplace(uf.find(i), dense.size());
    partition[i] = it->second;
  }
  return partition;
}

KeyClassDag build_class_dag(const std::vector<KeyNode>& nodes,
                            const std::vector<DependencyEdge>& edges,
                            const std::vector<std::size_t>& partition) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i) groups[partition.at(i)].push_back(i);

  struct Pending {
    KeyClassDag::KeyClass cls;
    std::string source_rule;
    std::size_t source_node;
  };
  std::vector<Pending> kept;
  for (auto& [id, members] : groups) {
    bool keyed = std::any_of(members.begin(), members.end(),
                             [&](std::size_t n) { return nodes[n].kind != KeyKind::Carried; });
    if (!keyed) continue;
    auto pick = [&](auto pred) -> std::optional<std::size_t> {
      std::optional<std::size_t> best;
      for (std::size_t n : members)
        if (pred(nodes[n]) && (!best || nodes[n].rule < nodes[*best].rule)) best = n;
      return best;
    };
    auto src = pick([](const KeyNode& k) { return k.fresh_bound; });
    if (!src) src = pick([](const KeyNode& k) { return k.occurrence.kind() == TermKind::FreshVar; });
    if (!src) src = members.front();
    kept.push_back({{nodes[*src].label, members}, nodes[*src].rule_name, *src});
  }

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t c = 0; c < kept.size(); ++c) by_label[kept[c].cls.label].push_back(c);
  for (auto& [label, cs] : by_label) {
    if (cs.size() < 2) continue;
    std::sort(cs.begin(), cs.end(), [&](std::size_t x, std::size_t y) {
      return std::tie(kept[x].source_rule, kept[x].source_node) <
             std::tie(kept[y].source_rule, kept[y].source_node);
    });
    for (std::size_t i = 1; i < cs.size(); ++i)
      kept[cs[i]].cls.label = label + "#" + std::to_string(i + 1);
  }

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> class_of(nodes.size(), none);
  std::vector<KeyClassDag::KeyClass> classes;
  for (std::size_t c = 0; c < kept.size(); ++c) {
    for (std::size_t n : kept[c].cls.members) class_of[n] = c;
    classes.push_back(std::move(kept[c].cls));
  }
  std::vector<DependencyEdge> class_edges;
  for (const DependencyEdge& e : edges) {
    if (class_of[e.from] == none || class_of[e.to] == none) continue;
    class_edges.push_back({class_of[e.from], class_of[e.to], e.kind});
  }
  return KeyClassDag::from_edges(std::move(classes), class_edges);
}

Extraction extract(const Model& m, ExtractOptions options) {
  Extraction x;
  x.nodes = collect_key_nodes(m);
  x.edges = extract_edges(m, x.nodes, options, &x.warnings);
  x.partition = unify_equivalent_keys(m, x.nodes);
  x.dag = build_class_dag(x.nodes, x.edges, x.partition);
  x.warnings.insert(x.warnings.end(), x.dag.warnings().begin(), x.dag.warnings().end());
  return x;
}

}  // namespace keyorder
