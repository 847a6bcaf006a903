#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace keyorder {

struct OracleConfig {
  /// Class labels in priority order (a linear extension of the key order).
  std::vector<std::string> ordering;
  /// Helper-lemma name template; `<label>` is replaced by a class label.
  std::string helper_pattern = "secret_<label>";
  std::set<std::string> ltk_labels;

  std::string helper_name(std::string_view label) const;
};

/// Plain `key = value` lines; `#` starts a comment. Lists are separated by
/// commas or whitespace. Throws std::invalid_argument naming the line.
OracleConfig parse_oracle_config(std::string_view text);
OracleConfig load_oracle_config(const std::string& path);

struct GoalLine {
  std::size_t index;
  std::string text;
};

/// Parses `index: goal-text`.
std::optional<GoalLine> parse_goal_line(std::string_view line);

struct GoalKind {
  enum Type { KnowledgeOfKey, HelperLemma, SignatureGoal, Other };
  Type type = Other;
  std::string label;  // set for KnowledgeOfKey and HelperLemma
  friend bool operator==(const GoalKind&, const GoalKind&) = default;
};

GoalKind classify_goal(const GoalLine& g, const OracleConfig& cfg);

/// Helper lemmas per class in ordering order, each only when a KU goal for
/// that class is open; then signature goals; then KU goals in ordering
/// order. Input order is kept within a group; other goals are left out.
std::vector<std::size_t> rank_goals(const std::vector<GoalLine>& goals, const OracleConfig& cfg);

/// Oracle wire adapter: goal lines in, ranked indices out (one per line).
/// Returns the process exit status.
int serve(const OracleConfig& cfg, std::string_view lemma_name, std::istream& in,
          std::ostream& out, std::ostream& err);

}  // namespace keyorder
