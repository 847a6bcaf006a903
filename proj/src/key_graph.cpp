#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "keyorder/key_dependency.hpp"

namespace keyorder {

namespace {

std::string join_cycle(const std::vector<std::string>& cycle) {
  std::string out = "cyclic key dependency: ";
  for (std::size_t i = 0; i < cycle.size(); ++i) out += (i ? " -> " : "") + cycle[i];
  return out;
}

std::vector<std::vector<std::size_t>> successors(const KeyClassDag& d) {
  std::vector<std::vector<std::size_t>> succ(d.size());
  for (const auto& e : d.edges()) succ[e.from].push_back(e.to);
  return succ;
}

/// Returns one cycle as class indices (first repeated at the end), or empty.
std::vector<std::size_t> find_cycle(std::size_t n, const std::vector<std::vector<std::size_t>>& succ) {
  enum : std::uint8_t { White, Grey, Black };
  std::vector<std::uint8_t> colour(n, White);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;
  auto dfs = [&](auto&& self, std::size_t v) -> bool {
    colour[v] = Grey;
    stack.push_back(v);
    for (std::size_t w : succ[v]) {
      if (colour[w] == Grey) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycle.assign(it, stack.end());
        cycle.push_back(w);
        return true;
      }
      if (colour[w] == White && self(self, w)) return true;
    }
    stack.pop_back();
    colour[v] = Black;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (colour[v] == White && dfs(dfs, v)) return cycle;
  return {};
}

}  // namespace

CyclicDependency::CyclicDependency(std::vector<std::string> cycle)
    : std::runtime_error(join_cycle(cycle)), cycle_(std::move(cycle)) {}

KeyClassDag KeyClassDag::from_edges(std::vector<KeyClass> classes,
                                    const std::vector<DependencyEdge>& edges) {
  KeyClassDag d;
  d.classes_ = std::move(classes);
  std::map<std::pair<std::size_t, std::size_t>, Edge> merged;
  std::set<std::size_t> looped;
  for (const DependencyEdge& e : edges) {
    if (e.from >= d.classes_.size() || e.to >= d.classes_.size())
      throw std::out_of_range("edge endpoint outside class list");
    if (e.from == e.to) {
      if (looped.insert(e.from).second)
        d.warnings_.push_back("dropped self-dependency of key class " + d.classes_[e.from].label);
      continue;
    }
    Edge& m = merged.try_emplace({e.from, e.to}, Edge{e.from, e.to}).first->second;
    (e.kind == DependencyKind::Secrecy ? m.secrecy : m.authenticity) = true;
  }
  for (auto& [key, e] : merged) d.edges_.push_back(e);

  auto cycle = find_cycle(d.size(), successors(d));
  if (!cycle.empty()) {
    std::vector<std::string> labels;
    for (std::size_t c : cycle) labels.push_back(d.classes_[c].label);
    throw CyclicDependency(std::move(labels));
  }
  return d;
}

std::optional<std::size_t> KeyClassDag::find(std::string_view label) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].label == label) return i;
  return std::nullopt;
}

const KeyClassDag::Edge* KeyClassDag::edge(std::size_t from, std::size_t to) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{from, to},
                             [](const Edge& e, const std::pair<std::size_t, std::size_t>& k) {
                               return std::pair{e.from, e.to} < k;
                             });
  if (it == edges_.end() || it->from != from || it->to != to) return nullptr;
  return &*it;
}

std::vector<std::vector<bool>> closure(const KeyClassDag& d, std::optional<DependencyKind> kind) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : d.edges())
    if (!kind || e.has(*kind)) succ[e.from].push_back(e.to);
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> work = succ[s];
    while (!work.empty()) {
      std::size_t v = work.back();
      work.pop_back();
      if (reach[s][v]) continue;
      reach[s][v] = true;
      for (std::size_t w : succ[v]) work.push_back(w);
    }
  }
  return reach;
}

KeyClassDag transitive_reduction(const KeyClassDag& d) {
  auto reach = closure(d);
  std::vector<DependencyEdge> kept;
  for (const auto& e : d.edges()) {
    bool implied = false;
    for (const auto& f : d.edges())
      if (f.from == e.from && f.to != e.to && reach[f.to][e.to]) {
        implied = true;
        break;
      }
    if (implied) continue;
    if (e.secrecy) kept.push_back({e.from, e.to, DependencyKind::Secrecy});
    if (e.authenticity) kept.push_back({e.from, e.to, DependencyKind::Authenticity});
  }
  return KeyClassDag::from_edges(d.classes(), kept);
}

std::vector<std::size_t> linearize(const KeyClassDag& d) {
  const std::size_t n = d.size();
  // A class is ready once everything it depends on has been placed.
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (const auto& e : d.edges()) {
    ++pending[e.from];
    dependents[e.to].push_back(e.from);
  }
  auto by_label = [&](std::size_t a, std::size_t b) {
    return std::tie(d.label(a), a) < std::tie(d.label(b), b);
  };
  std::set<std::size_t, decltype(by_label)> ready(by_label);
  for (std::size_t c = 0; c < n; ++c)
    if (pending[c] == 0) ready.insert(c);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t c = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(c);
    for (std::size_t dep : dependents[c])
      if (--pending[dep] == 0) ready.insert(dep);
  }
  return order;
}

std::size_t max_chain_length(const KeyClassDag& d) {
  auto order = linearize(d);
  std::vector<std::size_t> longest(d.size(), 0);
  std::vector<std::vector<std::size_t>> succ = successors(d);
  std::size_t best = 0;
  // Dependencies come first, so their chain lengths are final when read.
  for (std::size_t c : order) {
    for (std::size_t to : succ[c]) longest[c] = std::max(longest[c], longest[to] + 1);
    best = std::max(best, longest[c]);
  }
  return best;
}

std::string emit_dot(const KeyClassDag& d) {
  KeyClassDag r = transitive_reduction(d);
  std::ostringstream os;
  os << "digraph keys {\n  rankdir=BT;\n  node [shape=box];\n";
  for (std::size_t c : linearize(r)) os << "  \"" << r.label(c) << "\";\n";
  std::vector<std::tuple<std::string, std::string, int>> lines;
  for (const auto& e : r.edges()) {
    if (e.secrecy) lines.emplace_back(r.label(e.from), r.label(e.to), 0);
    if (e.authenticity) lines.emplace_back(r.label(e.from), r.label(e.to), 1);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [from, to, kind] : lines)
    os << "  \"" << from << "\" -> \"" << to << "\" [style=" << (kind ? "dashed" : "solid")
       << "];\n";
  os << "}\n";
  return os.str();
}

std::string emit_order(const KeyClassDag& d) {
  std::ostringstream os;
  for (std::size_t c : linearize(d)) os << d.label(c) << "\n";
  KeyClassDag r = transitive_reduction(d);
  os << "# " << d.size() << " classes, longest chain " << max_chain_length(d) << "\n";
  for (const auto& e : r.edges()) {
    if (e.secrecy) os << "# " << r.label(e.from) << " -> " << r.label(e.to) << "\n";
    if (e.authenticity) os << "# " << r.label(e.from) << " ~> " << r.label(e.to) << "\n";
  }
  return os.str();
}

}  // namespace keyorder
