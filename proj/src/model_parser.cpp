#include <fstream>
#include <sstream>

#include "cursor.hpp"
#include "keyorder/model.hpp"

namespace keyorder {

namespace {

using detail::Cursor;

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : cur_(text) {}

  Model parse() {
    Model m;
    cur_.expect("theory");
    m.name = cur_.identifier();
    cur_.accept_keyword("begin");
    while (!cur_.eof()) {
      if (cur_.accept_keyword("end")) {
        if (!cur_.eof()) cur_.fail("unexpected input after 'end'");
        break;
      }
      if (cur_.accept_keyword("builtins")) {
        cur_.expect(":");
        parse_builtins(m);
      } else if (cur_.accept_keyword("functions")) {
        cur_.expect(":");
        parse_functions(m);
      } else if (cur_.accept_keyword("rule")) {
        m.rules.push_back(parse_rule());
      } else if (cur_.accept_keyword("lemma")) {
        m.lemmas.push_back(parse_lemma());
      } else if (cur_.accept_keyword("restriction")) {
        Restriction r;
        r.name = cur_.identifier();
        cur_.expect(":");
        r.formula = cur_.quoted('"');
        m.restrictions.push_back(std::move(r));
      } else {
        cur_.fail("expected 'rule', 'lemma', 'restriction', 'functions' or 'builtins'");
      }
    }
    return m;
  }

 private:
  void parse_builtins(Model& m) {
    do {
      std::string b = trim(cur_.raw_until(",\n"));
      if (b.empty()) cur_.fail("expected builtin name");
      m.builtins.push_back(b);
    } while (cur_.accept(","));
  }

  void parse_functions(Model& m) {
    do {
      int line = cur_.line(), col = cur_.column();
      std::string f = cur_.identifier();
      cur_.expect("/");
      std::size_t arity = std::stoul(cur_.number());
      if (!sig_.declare(f, arity)) {
        throw ModelError(std::to_string(line) + ":" + std::to_string(col) + ": function '" + f +
                             "' conflicts with builtin arity",
                         line, col);
      }
      m.functions.emplace_back(f, arity);
    } while (cur_.accept(","));
  }

  Fact parse_fact() {
    Fact f;
    f.persistent = cur_.accept("!");
    f.name = cur_.identifier();
    cur_.expect("(");
    if (!cur_.accept(")")) {
      f.args.push_back(detail::parse_term_at(cur_, sig_));
      while (cur_.accept(",")) f.args.push_back(detail::parse_term_at(cur_, sig_));
      cur_.expect(")");
    }
    if (cur_.starts_with("[+]")) {
      cur_.expect("[+]");
      f.annotation = FactAnnotation::Prioritize;
    } else if (cur_.starts_with("[-]")) {
      cur_.expect("[-]");
      f.annotation = FactAnnotation::Deprioritize;
    }
    return f;
  }

  // Facts up to the closing bracket; the opening one has been consumed.
  std::vector<Fact> parse_fact_list(std::string_view close) {
    std::vector<Fact> facts;
    if (cur_.accept(close)) return facts;
    facts.push_back(parse_fact());
    while (cur_.accept(",")) facts.push_back(parse_fact());
    cur_.expect(close);
    return facts;
  }

  RewriteRule parse_rule() {
    RewriteRule r;
    r.name = cur_.identifier();
    cur_.expect(":");
    Substitution lets;
    if (cur_.accept_keyword("let")) {
      while (!cur_.accept_keyword("in")) {
        Term var = detail::parse_term_at(cur_, sig_);
        if (!var.is_variable()) cur_.fail("let binds a variable");
        cur_.expect("=");
        Term value = substitute(detail::parse_term_at(cur_, sig_), lets);
        lets.insert_or_assign(var, value);
        r.let_bindings.emplace_back(var, value);
        if (cur_.eof()) cur_.fail("expected 'in'");
      }
    }
    cur_.expect("[");
    r.premises = parse_fact_list("]");
    if (cur_.accept("-->")) {
      // no actions
    } else {
      cur_.expect("--[");
      r.actions = parse_fact_list("]->");
    }
    cur_.expect("[");
    r.conclusions = parse_fact_list("]");
    for (auto* list : {&r.premises, &r.actions, &r.conclusions})
      for (Fact& f : *list)
        for (Term& t : f.args) t = substitute(t, lets);
    return r;
  }

  Lemma parse_lemma() {
    Lemma l;
    l.name = cur_.identifier();
    if (cur_.accept("[")) {
      std::string raw = cur_.raw_until("]");
      cur_.expect("]");
      std::stringstream ss(raw);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) l.attributes.push_back(item);
      }
    }
    cur_.expect(":");
    l.trace_quantifier = trim(cur_.raw_until("\""));
    l.formula = cur_.quoted('"');
    return l;
  }

  Cursor cur_;
  Signature sig_;
};

}  // namespace

bool Lemma::has_attribute(std::string_view a) const {
  return std::find(attributes.begin(), attributes.end(), a) != attributes.end();
}

Signature Model::signature() const {
  Signature sig;
  for (const auto& [f, n] : functions) sig.declare(f, n);
  return sig;
}

const RewriteRule* Model::find_rule(std::string_view rule_name) const {
  for (const auto& r : rules)
    if (r.name == rule_name) return &r;
  return nullptr;
}

Model parse_model(std::string_view text, ParseOptions options) {
  Model m;
  try {
    m = ModelParser(text).parse();
  } catch (const TermSyntaxError& e) {
    throw ModelError(e.what(), e.line(), e.column());
  }
  if (options.validate) {
    for (const Diagnostic& d : validate(m))
      if (d.severity == Severity::Error) throw ModelError(to_string(d));
  }
  return m;
}

Model load_model(const std::string& path, ParseOptions options) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), options);
}

}  // namespace keyorder
