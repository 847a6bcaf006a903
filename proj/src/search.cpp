#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "keyorder/executor.hpp"

namespace keyorder {

namespace {

bool has_action(const RewriteRule& r, std::string_view name) {
  return std::any_of(r.actions.begin(), r.actions.end(), [&](const Fact& f) { return f.is(name); });
}

/// Class label of a reveal rule, taken from its Rev('label', ...) action.
std::optional<std::string> reveal_label(const RewriteRule& r) {
  for (const auto& a : r.actions)
    if (a.is("Rev") && !a.args.empty())
      return a.args[0].kind() == TermKind::Constant ? a.args[0].name() : to_string(a.args[0]);
  return std::nullopt;
}

/// Everything that can influence the rest of a run and its property checks.
struct StateKey {
  std::map<Fact, std::size_t> linear;
  std::set<Fact> persistent;
  std::set<Term> outputs;
  std::set<Fact> actions;
  std::map<std::string, std::size_t> counters;
  auto operator<=>(const StateKey&) const = default;
};

StateKey key_of(const ExecutionState& s) {
  StateKey k{s.linear, s.persistent, {s.outputs.begin(), s.outputs.end()}, {}, s.fresh_counter};
  for (const auto& step : s.trace) k.actions.insert(step.actions.begin(), step.actions.end());
  return k;
}

class Searcher {
 public:
  Searcher(const Executor& ex, std::vector<std::size_t> rules, const SearchProperty& prop, const KeyClassDag* dag,
           std::atomic<std::size_t>& states)
      : ex_(ex), rules_(std::move(rules)), prop_(prop), dag_(dag), states_(states) {}

  std::vector<Violation> violations(const ExecutionState& s) const {
    if (prop_.kind == SearchProperty::Agreement) return check_agreement(s.trace, prop_.agreement);
    auto v = check_secrecy(s.trace, s.knowledge, dag_);
    if (!prop_.secrecy_class.empty())
      std::erase_if(v, [&](const Violation& x) { return x.action.name != "Secret_" + prop_.secrecy_class; });
    return v;
  }

  /// Successors of `s` in exploration order.
  std::vector<ExecutionState> successors(const ExecutionState& s) const {
    std::vector<ExecutionState> out;
    for (std::size_t r : rules_)
      for (const auto& inst : ex_.instances(r, s)) out.push_back(ex_.fire(s, inst));
    return out;
  }

  std::optional<ExecutionState> dfs(const ExecutionState& s, std::size_t remaining) {
    ++states_;
    if (!violations(s).empty()) return s;
    if (remaining == 0) return std::nullopt;
    auto [it, fresh] = memo_.try_emplace(key_of(s), remaining);
    if (!fresh) {
      if (it->second >= remaining) return std::nullopt;
      it->second = remaining;
    }
    for (std::size_t r : rules_)
      for (const auto& inst : ex_.instances(r, s))
        if (auto found = dfs(ex_.fire(s, inst), remaining - 1)) return found;
    return std::nullopt;
  }

 private:
  const Executor& ex_;
  std::vector<std::size_t> rules_;
  const SearchProperty& prop_;
  const KeyClassDag* dag_;
  std::atomic<std::size_t>& states_;
  /// State -> largest remaining depth already explored without a finding.
  std::map<StateKey, std::size_t> memo_;
};

}  // namespace

SearchResult search_attack(const Model& m, const SearchProperty& property, const SearchBounds& bounds,
                           const SearchOptions& options) {
  std::optional<KeyClassDag> own_dag;
  const KeyClassDag* dag = options.dag;
  if (!dag && property.kind == SearchProperty::Secrecy) {
    try {
      own_dag = extract(m).dag;
      dag = &*own_dag;
    } catch (const CyclicDependency&) {
    }
  }

  auto disabled = [&](const RewriteRule& r) {
    auto label = reveal_label(r);
    return label && !options.reveals.count(*label);
  };

  // Uncharged setup prefix.
  Executor setup(m, {bounds.composition_depth, SIZE_MAX});
  ExecutionState start = setup.initial_state();
  for (std::size_t r = 0; r < m.rules.size(); ++r) {
    if (!has_action(m.rules[r], "Setup") || disabled(m.rules[r])) continue;
    auto insts = setup.instances(r, start);
    if (!insts.empty()) start = setup.fire(start, insts.front());
  }
  SearchResult result;
  result.setup_steps = start.trace.size();

  Executor ex(m, {bounds.composition_depth, start.fresh_minted + bounds.fresh_budget});
  std::vector<std::size_t> rules;
  for (std::size_t r = 0; r < m.rules.size(); ++r) {
    if (has_action(m.rules[r], "Setup")) continue;
    if (disabled(m.rules[r])) continue;
    rules.push_back(r);
  }
  std::stable_sort(rules.begin(), rules.end(),
                   [&](std::size_t a, std::size_t b) { return m.rules[a].name < m.rules[b].name; });

  std::atomic<std::size_t> states{0};
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<Searcher> workers;
  for (unsigned w = 0; w < threads; ++w) workers.emplace_back(ex, rules, property, dag, states);

  auto finish = [&](const ExecutionState& s) {
    result.attack = s.trace;
    result.violations = workers[0].violations(s);
    result.states = states.load();
    return result;
  };
  ++states;
  if (!workers[0].violations(start).empty()) return finish(start);
  std::vector<ExecutionState> first = workers[0].successors(start);

  for (std::size_t depth = 1; depth <= bounds.max_steps; ++depth) {
    // Branch i is searched by worker i % threads; the lowest branch with a
    // finding wins, so the result does not depend on scheduling.
    std::atomic<std::size_t> best{first.size()};
    std::optional<ExecutionState> best_state;
    std::mutex mu;
    auto work = [&](unsigned w) {
      for (std::size_t i = w; i < first.size(); i += threads) {
        if (i >= best.load()) return;
        auto found = workers[w].dfs(first[i], depth - 1);
        if (found) {
          std::lock_guard lock(mu);
          if (i < best.load()) {
            best = i;
            best_state = std::move(found);
          }
          return;
        }
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    if (best_state) return finish(*best_state);
  }
  result.states = states.load();
  return result;
}

}  // namespace keyorder
