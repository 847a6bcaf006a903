#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "keyorder/key_dependency.hpp"
#include "keyorder/knowledge.hpp"
#include "keyorder/model.hpp"

namespace keyorder {

struct TraceStep {
  std::size_t step;  // 1-based
  std::string rule;
  Substitution subst;
  std::vector<Fact> actions;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Trace = std::vector<TraceStep>;

struct ExecutionState {
  std::map<Fact, std::size_t> linear;  // fact -> multiplicity
  std::set<Fact> persistent;
  /// Last index minted per fresh variable name; names are `~x.n`.
  std::map<std::string, std::size_t> fresh_counter;
  std::size_t fresh_minted = 0;
  KnowledgeSet knowledge;
  Trace trace;
  /// Out payloads in the order they were sent.
  std::vector<Term> outputs;
};

/// A ground rule instance ready to fire.
struct Instance {
  std::size_t rule;
  Substitution subst;
  std::vector<Fact> consumed;  // linear premises
  std::vector<Fact> actions;
  std::vector<Fact> conclusions;
  /// (fresh variable name, index) for each Fr premise.
  std::vector<std::pair<std::string, std::size_t>> minted;
};

struct ExecOptions {
  /// Composition depth of attacker deduction; 0 selects the model default
  /// (deepest protocol message + 2).
  int composition_depth = 0;
  /// Maximum fresh names minted over the whole execution.
  std::size_t fresh_budget = SIZE_MAX;
};

class Executor {
 public:
  explicit Executor(const Model& m, ExecOptions options = {});

  const Model& model() const { return m_; }
  int composition_depth() const { return depth_; }
  ExecutionState initial_state() const;

  /// All ground instances of `rule` in `s`. Variables in `fixed` are bound
  /// before matching. Eq/Neq actions and a declared replay restriction
  /// filter the result.
  std::vector<Instance> instances(std::size_t rule, const ExecutionState& s,
                                  const Substitution& fixed = {}) const;
  ExecutionState fire(const ExecutionState& s, const Instance& inst) const;

  /// Public names occurring anywhere in the model.
  const std::vector<Term>& constants() const { return constants_; }
  bool enforces_replay() const { return replay_; }

 private:
  /// Extensions of `s` matching `pattern` against analyzed terms or
  /// composing it; bare variables may stay unbound.
  std::vector<Substitution> resolve(const Term& pattern, const Substitution& s,
                                    const KnowledgeSet& k) const;
  /// Binds the variables resolve() left open and keeps the extensions under
  /// which the ground pattern is derivable. Open fresh-sorted variables take
  /// the attacker nonce.
  std::vector<Substitution> bind_free_in(const Term& pattern, const Substitution& s,
                                         const KnowledgeSet& k) const;

  const Model& m_;
  ExecOptions options_;
  int depth_;
  bool replay_;
  std::vector<Term> constants_;
};

/// Default composition depth: deepest In/Out term of the model + 2.
int default_composition_depth(const Model& m);

// ---------------------------------------------------------------- scenarios

struct ScenarioStep {
  std::string rule;
  Substitution bindings;
  int line = 0;
};

/// One step per line: `RuleName [var=term ...]`, `#` starts a comment.
/// Variables carry their sort marker, e.g. `$J='V2'`.
std::vector<ScenarioStep> parse_scenario(std::string_view text);
std::vector<ScenarioStep> load_scenario(const std::string& path);

class StuckScenario : public std::runtime_error {
 public:
  StuckScenario(std::size_t step, std::string rule);
  std::size_t step() const { return step_; }
  const std::string& rule() const { return rule_; }

 private:
  std::size_t step_;
  std::string rule_;
};

/// Fires each step's first applicable instance. Throws StuckScenario, or
/// std::invalid_argument for an unknown rule.
ExecutionState run_scenario(const Model& m, const std::vector<ScenarioStep>& script,
                            ExecOptions options = {});

// --------------------------------------------------------------- properties

struct Violation {
  std::string property;
  std::size_t step;
  Fact action;
  std::string detail;
};

/// No two steps carry the same Message(x, n) action.
bool check_replay_restriction(const Trace& t);

/// Secret_<c>(P, x) is violated when x is derivable, unless some
/// Rev(c', n, k) and Honest(P, n) occur for a class c' that c depends on
/// (reflexively; dependencies come from `dag` when given).
std::vector<Violation> check_secrecy(const Trace& t, const KnowledgeSet& k,
                                     const KeyClassDag* dag = nullptr);

enum class Agreement : std::uint8_t { Aliveness, WeakAgreement, NonInjectiveAgreement };

std::string_view to_string(Agreement a);
std::optional<Agreement> parse_agreement(std::string_view name);

/// Checks every Commit(n, m, t) whose peer m is Honest for some party. A
/// Rev by an Honest party excuses the whole trace.
std::vector<Violation> check_agreement(const Trace& t, Agreement kind);

// ------------------------------------------------------------------- search

struct SearchProperty {
  enum Kind : std::uint8_t { Secrecy, Agreement };
  Kind kind = Agreement;
  keyorder::Agreement agreement = keyorder::Agreement::WeakAgreement;
  std::string secrecy_class;  // empty: every Secret_* action
};

struct SearchBounds {
  std::size_t max_steps = 12;
  std::size_t fresh_budget = 6;
  int composition_depth = 6;
};

struct SearchOptions {
  /// Reveal rules (those with a Rev action, setup rules included) whose
  /// label is listed here stay enabled; all others are disabled.
  std::set<std::string> reveals;
  const KeyClassDag* dag = nullptr;
  /// Worker threads over the first protocol step; 0 picks the hardware count.
  unsigned threads = 0;
};

struct SearchResult {
  std::optional<Trace> attack;
  std::vector<Violation> violations;
  std::size_t states = 0;
  /// Steps of the uncharged setup prefix at the start of the trace.
  std::size_t setup_steps = 0;
};

/// Bounded attack search. Rules with a Setup() action fire once each, in
/// model order, as an uncharged prefix and are disabled afterwards. The
/// remaining steps are explored by iterative deepening, rules ordered by
/// name, so the first attack found is shortest and then lexicographically
/// least by rule names.
SearchResult search_attack(const Model& m, const SearchProperty& property,
                           const SearchBounds& bounds, const SearchOptions& options = {});

// ----------------------------------------------------------------- trace io

/// One line per action: `step rule Action(args)`; steps without actions
/// print `step rule`.
void write_trace_text(std::ostream& os, const Trace& t);
/// JSON document: {"model", "steps": [{"step", "rule", "bindings", "actions"}],
/// "violations": [{"property", "step", "action", "detail"}]}.
std::string trace_to_json(const std::string& model_name, const Trace& t,
                          const std::vector<Violation>& violations);

}  // namespace keyorder
