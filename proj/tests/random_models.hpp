// Random acyclic key models and an independent checker for the order axioms.
#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "keyorder/key_dependency.hpp"

namespace keyorder::testing {

struct RandomKeyModel {
  std::string text;
  std::vector<std::string> labels;
  /// (from, to, authenticity) over label indices; acyclic by construction.
  std::set<std::tuple<std::size_t, std::size_t, bool>> edges;
  bool cyclic = false;
};

/// Each key is created by its own rule and published as pk(k) so it always
/// forms a keyed class. Every edge gets one rule that reads both keys from
/// persistent store facts and sends senc(x, y) or sign(<'t', pk(x)>, y).
/// With `add_cycle` one back edge closes a cycle.
inline RandomKeyModel random_key_model(std::mt19937_64& rng, bool add_cycle = false) {
  RandomKeyModel out;
  std::size_t n = std::uniform_int_distribution<std::size_t>(2, 7)(rng);
  // Labels are shuffled so tie-breaking is not aligned with rule order.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < n; ++i) out.labels.push_back("k" + std::to_string(perm[i]));

  std::bernoulli_distribution edge(0.4), auth(0.3);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (edge(rng)) out.edges.insert({a, b, auth(rng)});
  if (add_cycle && !out.edges.empty()) {
    auto [a, b, kind] = *out.edges.begin();
    // a -> b exists, so b -> a closes a cycle.
    out.edges.insert({b, a, kind});
    out.cyclic = true;
  }

  std::ostringstream os;
  os << "theory Random\nbegin\n\n";
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& l = out.labels[i];
    os << "rule Gen_" << l << ": [ Fr(~" << l << ") ] --> [ !Key_" << l << "(~" << l
       << "), Out(pk(~" << l << ")) ]\n";
  }
  std::size_t r = 0;
  for (auto [a, b, au] : out.edges) {
    os << "rule Edge" << r++ << ": [ !Key_" << out.labels[a] << "(x), !Key_" << out.labels[b]
       << "(y) ] --> [ Out(" << (au ? "sign(<'t', pk(x)>, y)" : "senc(x, y)") << ") ]\n";
  }
  os << "\nend\n";
  out.text = os.str();
  return out;
}

/// Returns an empty string when every axiom holds, otherwise a description.
inline std::string check_order_axioms(const RandomKeyModel& rm) {
  Model m = parse_model(rm.text);
  KeyClassDag d;
  try {
    d = extract(m).dag;
  } catch (const CyclicDependency&) {
    return rm.cyclic ? "" : "unexpected cycle";
  }
  if (rm.cyclic) return "cycle not rejected";

  const std::size_t n = rm.labels.size();
  if (d.size() != n) return "class count " + std::to_string(d.size());
  std::vector<std::size_t> id(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = d.find(rm.labels[i]);
    if (!c) return "missing class " + rm.labels[i];
    id[i] = *c;
  }

  // Stored edges are exactly the generated ones, and irreflexive.
  if (d.edges().size() != rm.edges.size()) return "edge count";
  for (auto [a, b, au] : rm.edges) {
    const auto* e = d.edge(id[a], id[b]);
    if (!e) return "missing edge";
    if (e->secrecy == au || e->authenticity != au) return "wrong edge kind";
  }
  for (const auto& e : d.edges())
    if (e.from == e.to) return "reflexive edge";

  // Independent reachability oracle: Warshall over generated edges.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> auth_reach = reach;
  for (auto [a, b, au] : rm.edges) {
    reach[a][b] = true;
    if (au) auth_reach[a][b] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
        if (auth_reach[i][k] && auth_reach[k][j]) auth_reach[i][j] = true;
      }

  auto cl = closure(d);
  auto acl = closure(d, DependencyKind::Authenticity);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (cl[id[i]][id[j]] != reach[i][j]) return "closure mismatch";
      if (acl[id[i]][id[j]] != auth_reach[i][j]) return "authenticity closure mismatch";
    }
  // Transitivity of the authenticity closure.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (acl[a][b] && acl[b][c] && !acl[a][c]) return "authenticity closure not transitive";
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && cl[a][b] && cl[b][a]) return "antisymmetry violated";

  KeyClassDag red = transitive_reduction(d);
  if (closure(red) != cl) return "reduction changed closure";
  if (transitive_reduction(red).edges() != red.edges()) return "reduction not idempotent";
  for (const auto& e : red.edges())
    for (const auto& f : red.edges())
      if (e.from == f.from && e.to != f.to && cl[f.to][e.to]) return "reduction kept implied edge";

  auto order = linearize(d);
  if (order.size() != n) return "linearization incomplete";
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[order[i]] = i;
  for (const auto& e : d.edges())
    if (pos[e.to] >= pos[e.from]) return "linearization violates an edge";

  std::vector<std::size_t> longest(n, 0);
  std::size_t best = 0;
  for (std::size_t a = 0; a < n; ++a) {  // generated edges point to lower indices
    for (auto [x, y, au] : rm.edges)
      if (x == a) longest[a] = std::max(longest[a], longest[y] + 1);
    best = std::max(best, longest[a]);
  }
  if (max_chain_length(d) != best) return "max chain length";
  return "";
}

}  // namespace keyorder::testing
