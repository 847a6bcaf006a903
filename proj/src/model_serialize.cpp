#include <sstream>

#include "keyorder/model.hpp"

namespace keyorder {

std::string serialize(const Fact& f) {
  std::ostringstream os;
  if (f.persistent) os << '!';
  os << f.name << '(';
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    if (i) os << ", ";
    os << f.args[i];
  }
  os << ')';
  if (f.annotation == FactAnnotation::Prioritize) os << "[+]";
  if (f.annotation == FactAnnotation::Deprioritize) os << "[-]";
  return os.str();
}

std::string to_string(const Fact& f) { return serialize(f); }

namespace {

void write_facts(std::ostringstream& os, const std::vector<Fact>& facts) {
  for (std::size_t i = 0; i < facts.size(); ++i) {
    os << (i ? ",\n    " : " ") << serialize(facts[i]);
  }
  os << (facts.empty() ? "" : " ");
}

}  // namespace

std::string serialize(const Model& m) {
  std::ostringstream os;
  os << "theory " << m.name << "\nbegin\n\n";
  if (!m.builtins.empty()) {
    os << "builtins: ";
    for (std::size_t i = 0; i < m.builtins.size(); ++i) os << (i ? ", " : "") << m.builtins[i];
    os << "\n";
  }
  if (!m.functions.empty()) {
    os << "functions: ";
    for (std::size_t i = 0; i < m.functions.size(); ++i)
      os << (i ? ", " : "") << m.functions[i].first << '/' << m.functions[i].second;
    os << "\n";
  }
  if (!m.builtins.empty() || !m.functions.empty()) os << "\n";

  for (const RewriteRule& r : m.rules) {
    os << "rule " << r.name << ":\n";
    if (!r.let_bindings.empty()) {
      os << "  let\n";
      for (const auto& [var, value] : r.let_bindings) os << "    " << var << " = " << value << "\n";
      os << "  in\n";
    }
    os << "  [";
    write_facts(os, r.premises);
    if (r.actions.empty()) {
      os << "]\n  -->\n  [";
    } else {
      os << "]\n  --[";
      write_facts(os, r.actions);
      os << "]->\n  [";
    }
    write_facts(os, r.conclusions);
    os << "]\n\n";
  }
  for (const Restriction& r : m.restrictions) {
    os << "restriction " << r.name << ":\n  \"" << r.formula << "\"\n\n";
  }
  for (const Lemma& l : m.lemmas) {
    os << "lemma " << l.name;
    if (!l.attributes.empty()) {
      os << " [";
      for (std::size_t i = 0; i < l.attributes.size(); ++i) os << (i ? ", " : "") << l.attributes[i];
      os << "]";
    }
    os << ":\n";
    if (!l.trace_quantifier.empty()) os << "  " << l.trace_quantifier << "\n";
    os << "  \"" << l.formula << "\"\n\n";
  }
  os << "end\n";
  return os.str();
}

}  // namespace keyorder
