#include <doctest.h>

#include "keyorder/model.hpp"

using namespace keyorder;

namespace {

const char* kMinimal = R"spk(
theory Minimal
begin
// a single rule
rule A: [Fr(~k)] --[New(~k)]-> [Out(senc('m', ~k))]
end
)spk";

const char* kRich = R"spk(
theory Rich
begin
builtins: symmetric-encryption, signing
functions: succ/1, zero/0

/* state machine with a let block */
rule Init:
  let
    msg = <'hello', pk(~ltk)>
    sig = sign(msg, ~ltk)
  in
  [ Fr(~ltk) ]
  --[ Honest($A) ]->
  [ !Ltk($A, ~ltk), St($A, ~ltk, zero), Out(<msg, sig>) ]

rule Step:
  [ St($A, k, n)[+], In(senc(x, k))[-] ]
  -->
  [ St($A, k, succ(n)) ]

restriction OnlyOnce: "All #i #j. Once() @ #i & Once() @ #j ==> #i = #j"

lemma secret_ltk [reuse, use_induction]:
  all-traces
  "All k #i. Secret(k) @ #i ==> not (Ex #j. K(k) @ #j)"

lemma exec:
  exists-trace "Ex #i. Honest('a') @ #i"
end
)spk";

std::string error_of(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ModelError& e) {
    return e.what();
  }
  return "";
}

std::string wrap(const std::string& body) { return "theory T begin\n" + body + "\nend\n"; }

}  // namespace

TEST_CASE("minimal rule") {
  Model m = parse_model(kMinimal);
  CHECK(m.name == "Minimal");
  REQUIRE(m.rules.size() == 1);
  const RewriteRule& r = m.rules[0];
  CHECK(r.name == "A");
  REQUIRE(r.premises.size() == 1);
  CHECK(r.premises[0].is("Fr"));
  CHECK(r.premises[0].args[0] == Term::fresh_var("k"));
  CHECK(r.actions.at(0).name == "New");
  CHECK(r.conclusions.at(0).args[0] == parse_term("senc('m', ~k)"));
}

TEST_CASE("let bindings are expanded sequentially") {
  Model m = parse_model(kRich);
  const RewriteRule* init = m.find_rule("Init");
  REQUIRE(init);
  CHECK(init->let_bindings.size() == 2);
  CHECK(init->let_bindings[1].second == parse_term("sign(<'hello', pk(~ltk)>, ~ltk)"));
  CHECK(init->conclusions[2].args[0] ==
        parse_term("<<'hello', pk(~ltk)>, sign(<'hello', pk(~ltk)>, ~ltk)>"));
  CHECK(init->conclusions[0].persistent);
}

TEST_CASE("annotations, lemmas and restrictions") {
  Model m = parse_model(kRich);
  const RewriteRule* step = m.find_rule("Step");
  REQUIRE(step);
  CHECK(step->premises[0].annotation == FactAnnotation::Prioritize);
  CHECK(step->premises[1].annotation == FactAnnotation::Deprioritize);
  CHECK(step->actions.empty());
  REQUIRE(m.lemmas.size() == 2);
  CHECK(m.lemmas[0].has_attribute("reuse"));
  CHECK(m.lemmas[0].has_attribute("use_induction"));
  CHECK(m.lemmas[0].trace_quantifier == "all-traces");
  CHECK(m.lemmas[0].formula == "All k #i. Secret(k) @ #i ==> not (Ex #j. K(k) @ #j)");
  CHECK(m.lemmas[1].trace_quantifier == "exists-trace");
  REQUIRE(m.restrictions.size() == 1);
  CHECK(m.restrictions[0].name == "OnlyOnce");
  CHECK(m.functions.size() == 2);
}

TEST_CASE("round trip") {
  for (const char* text : {kMinimal, kRich}) {
    Model m = parse_model(text);
    std::string s = serialize(m);
    Model back = parse_model(s);
    CHECK(back == m);
    CHECK(serialize(back) == s);
  }
  CHECK(serialize(parse_model(kRich)).find("!Ltk(") != std::string::npos);
}

TEST_CASE("parse errors") {
  CHECK(error_of(wrap("rule A: [Out(x)] --> [ ]")).find("Out not allowed in premise") !=
        std::string::npos);
  CHECK(error_of(wrap("rule A: [ ] --> [In('a')]")).find("In not allowed in conclusion") !=
        std::string::npos);
  CHECK(error_of(wrap("rule A: [ ] --> [Out(x)]")).find("free variable 'x'") != std::string::npos);
  CHECK(error_of(wrap("rule A: [ ] --> [Out(foo(x))]")).find("foo") != std::string::npos);
  CHECK(error_of(wrap("rule A: [Fr(x)] --> [Out(x)]")).find("fresh") != std::string::npos);
  CHECK(error_of(wrap("rule A: [In(x)] --> [Out(x + x)]")).find("multiset union") !=
        std::string::npos);
  CHECK(error_of(wrap("rule A: [In(x)] --> [Cert(x)]\nrule B: [In(x)] --> [Cert(x, x, x)]"))
            .find("arity conflict for fact 'Cert'") != std::string::npos);
  CHECK(error_of(wrap("rule A: [Fr(~k)] --> [Out(~k), Out($k)]")).find("both fresh and public") !=
        std::string::npos);

  try {
    parse_model("theory T begin\nrule A: [Fr(~k) --> [ ]\nend");
    FAIL("expected a syntax error");
  } catch (const ModelError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("validate") {
  Model m = parse_model(kMinimal);
  CHECK(validate(m).empty());
  m.rules.push_back(m.rules[0]);
  auto d = validate(m);
  REQUIRE(d.size() == 1);
  CHECK(d[0].severity == Severity::Error);
  CHECK(d[0].message.find("duplicate rule name") != std::string::npos);

  Model p = parse_model(wrap("rule A: [In(x)] --> [!F(x)]\nrule B: [F(x)] --> [ ]"),
                        ParseOptions{.validate = false});
  CHECK(has_errors(validate(p)));
}

TEST_CASE("parsing is deterministic") {
  CHECK(parse_model(kRich) == parse_model(kRich));
}
