#include "keyorder/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace keyorder {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Whole-word occurrence of `word` in `text`.
bool contains_word(std::string_view text, std::string_view word) {
  for (std::size_t p = text.find(word); p != std::string_view::npos; p = text.find(word, p + 1)) {
    bool left = p == 0 || !ident_char(text[p - 1]);
    bool right = p + word.size() >= text.size() || !ident_char(text[p + word.size()]);
    if (left && right) return true;
  }
  return false;
}

/// Argument text of the first `KU(` application, up to its closing paren.
std::optional<std::string_view> ku_argument(std::string_view text) {
  for (std::size_t p = text.find("KU("); p != std::string_view::npos; p = text.find("KU(", p + 1)) {
    if (p > 0 && ident_char(text[p - 1])) continue;  // e.g. `FooKU(`
    std::size_t start = p + 3;
    int depth = 1;
    for (std::size_t i = start; i < text.size(); ++i) {
      if (text[i] == '(') ++depth;
      if (text[i] == ')' && --depth == 0) return trim(text.substr(start, i - start));
    }
    return trim(text.substr(start));
  }
  return std::nullopt;
}

/// Name of a token such as `~pgk.3`, `pgk` or `$A` without sort marker and
/// fresh-name suffix.
std::string bare_name(std::string_view tok) {
  if (!tok.empty() && (tok.front() == '~' || tok.front() == '$')) tok.remove_prefix(1);
  std::size_t n = 0;
  while (n < tok.size() && ident_char(tok[n])) ++n;
  return std::string(tok.substr(0, n));
}

/// Bare names of all `~name` tokens in the text.
std::vector<std::string> fresh_names(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t p = text.find('~'); p != std::string_view::npos; p = text.find('~', p + 1)) {
    std::string n = bare_name(text.substr(p));
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

}  // namespace

std::string OracleConfig::helper_name(std::string_view label) const {
  std::string out = helper_pattern;
  const std::string hole = "<label>";
  for (std::size_t p = out.find(hole); p != std::string::npos; p = out.find(hole, p + label.size()))
    out.replace(p, hole.size(), label);
  return out;
}

OracleConfig parse_oracle_config(std::string_view text) {
  OracleConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("oracle config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key(trim(l.substr(0, eq)));
    std::string_view value = trim(l.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key == "ordering") {
      cfg.ordering = split_list(value);
      std::set<std::string> seen;
      for (const auto& o : cfg.ordering)
        if (!seen.insert(o).second)
          throw std::invalid_argument("oracle config line " + std::to_string(lineno) +
                                      ": duplicate label '" + o + "' in ordering");
    } else if (key == "helper_pattern") {
      cfg.helper_pattern = std::string(value);
    } else if (key == "ltk_labels") {
      auto v = split_list(value);
      cfg.ltk_labels = std::set<std::string>(v.begin(), v.end());
    } else {
      throw std::invalid_argument("oracle config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

OracleConfig load_oracle_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read oracle config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_oracle_config(ss.str());
}

std::optional<GoalLine> parse_goal_line(std::string_view line) {
  auto colon = line.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string_view num = trim(line.substr(0, colon));
  if (num.empty() || num.size() > 18 ||
      !std::all_of(num.begin(), num.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  return GoalLine{std::stoull(std::string(num)), std::string(trim(line.substr(colon + 1)))};
}

GoalKind classify_goal(const GoalLine& g, const OracleConfig& cfg) {
  for (const auto& label : cfg.ordering)
    if (contains_word(g.text, cfg.helper_name(label))) return {GoalKind::HelperLemma, label};

  if (auto arg = ku_argument(g.text)) {
    if (arg->starts_with("sign(")) return {GoalKind::SignatureGoal, ""};
    std::string name = bare_name(*arg);
    if (std::find(cfg.ordering.begin(), cfg.ordering.end(), name) != cfg.ordering.end())
      return {GoalKind::KnowledgeOfKey, name};
  }
  for (const auto& n : fresh_names(g.text))
    if (cfg.ltk_labels.count(n)) return {GoalKind::SignatureGoal, ""};
  return {};
}

std::vector<std::size_t> rank_goals(const std::vector<GoalLine>& goals, const OracleConfig& cfg) {
  std::vector<GoalKind> kinds;
  for (const auto& g : goals) kinds.push_back(classify_goal(g, cfg));

  std::vector<std::size_t> out;
  std::set<std::size_t> emitted;
  auto emit = [&](std::size_t idx) {
    if (emitted.insert(idx).second) out.push_back(idx);
  };
  auto open_ku = [&](const std::string& label) {
    for (const auto& k : kinds)
      if (k.type == GoalKind::KnowledgeOfKey && k.label == label) return true;
    return false;
  };

  for (const auto& label : cfg.ordering) {
    if (!open_ku(label)) continue;
    for (std::size_t i = 0; i < goals.size(); ++i)
      if (kinds[i].type == GoalKind::HelperLemma && kinds[i].label == label) emit(goals[i].index);
  }
  for (std::size_t i = 0; i < goals.size(); ++i)
    if (kinds[i].type == GoalKind::SignatureGoal) emit(goals[i].index);
  for (const auto& label : cfg.ordering)
    for (std::size_t i = 0; i < goals.size(); ++i)
      if (kinds[i].type == GoalKind::KnowledgeOfKey && kinds[i].label == label) emit(goals[i].index);
  return out;
}

int serve(const OracleConfig& cfg, std::string_view lemma_name, std::istream& in,
          std::ostream& out, std::ostream& err) {
  (void)lemma_name;  // ranking does not depend on the lemma under proof
  std::vector<GoalLine> goals;
  std::set<std::size_t> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto g = parse_goal_line(line);
    if (!g) {
      err << "oracle: skipping malformed line " << lineno << ": " << line << "\n";
      continue;
    }
    if (!seen.insert(g->index).second) {
      err << "oracle: skipping duplicate goal index " << g->index << "\n";
      continue;
    }
    goals.push_back(std::move(*g));
  }
  if (in.bad()) {
    err << "oracle: error reading goals\n";
    return 1;
  }
  for (std::size_t idx : rank_goals(goals, cfg)) out << idx << "\n";
  out.flush();
  return 0;
}

}  // namespace keyorder
