#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "ensemble_checks.hpp"
#include "keyorder/executor.hpp"

using namespace keyorder;
using keyorder::testing::secret_values;

namespace {

const std::string kAssets = KEYORDER_ASSET_DIR;

const Model& static_model() {
  static const Model m = load_model(kAssets + "/models/ensemble_static.spk");
  return m;
}

const Model& nomatch_model() {
  static const Model m = load_model(kAssets + "/models/ensemble_static_nomatch.spk");
  return m;
}

ExecutionState run_file(const Model& m, const std::string& scenario) {
  return run_scenario(m, load_scenario(kAssets + "/scenarios/" + scenario));
}

std::vector<std::string> action_names(const Trace& t, std::initializer_list<const char*> keep) {
  std::vector<std::string> out;
  for (const auto& step : t)
    for (const auto& a : step.actions)
      if (std::find(keep.begin(), keep.end(), a.name) != keep.end()) out.push_back(a.name);
  return out;
}

TraceStep step(std::size_t i, std::string rule, std::vector<Fact> actions) {
  return {i, std::move(rule), {}, std::move(actions)};
}

Fact act(const char* name, std::initializer_list<const char*> args) {
  Fact f{name, false, {}, FactAnnotation::None};
  for (const char* a : args) f.args.push_back(parse_term(a));
  return f;
}

}  // namespace

TEST_CASE("full run reaches every protocol phase") {
  ExecutionState s = run_file(static_model(), "static_full_run.txt");
  CHECK(s.trace.size() == 18);
  CHECK(action_names(s.trace, {"CAM", "JoinRequest", "JoinResponse", "Leave", "KUR", "KeyUpdate"}) ==
        std::vector<std::string>{"CAM", "JoinRequest", "JoinResponse", "CAM", "JoinRequest", "JoinResponse",
                                 "Leave", "KUR", "KeyUpdate"});
  std::size_t secrets = 0;
  for (const auto& st : s.trace)
    secrets += std::count_if(st.actions.begin(), st.actions.end(),
                             [](const Fact& a) { return a.name.rfind("Secret_", 0) == 0; });
  CHECK(secrets == 15);
  CHECK(check_secrecy(s.trace, s.knowledge).empty());
  for (auto kind : {Agreement::Aliveness, Agreement::WeakAgreement, Agreement::NonInjectiveAgreement})
    CHECK(check_agreement(s.trace, kind).empty());
  CHECK(check_replay_restriction(s.trace));
  for (std::size_t i = 0; i < s.trace.size(); ++i) CHECK(s.trace[i].step == i + 1);
}

TEST_CASE("execution is deterministic") {
  ExecutionState a = run_file(static_model(), "static_full_run.txt");
  ExecutionState b = run_file(static_model(), "static_full_run.txt");
  CHECK(a.trace == b.trace);
  CHECK(a.knowledge == b.knowledge);
  CHECK(a.outputs == b.outputs);
}

TEST_CASE("fresh names are numbered per variable") {
  ExecutionState s = run_file(static_model(), "static_full_run.txt");
  auto jrek = secret_values(s.trace, "jrek");
  REQUIRE(jrek.size() == 2);
  CHECK(to_string(jrek[0]) == "~jrek.1");
  CHECK(to_string(jrek[1]) == "~jrek.2");
  CHECK(s.fresh_counter.at("jrek") == 2);
}

TEST_CASE("a step without an applicable instance is reported") {
  auto script = parse_scenario(
      "CA_Setup\nVehicle_Setup_V1\nVehicle_Setup_V2\n# response before any request\n"
      "JoinResponse_Leader\n");
  try {
    run_scenario(static_model(), script);
    FAIL("expected StuckScenario");
  } catch (const StuckScenario& e) {
    CHECK(e.step() == 4);
    CHECK(e.rule() == "JoinResponse_Leader");
  }
  CHECK_THROWS_AS(run_scenario(static_model(), parse_scenario("NoSuchRule\n")), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario("CA_Setup novar\n"), std::invalid_argument);
}

TEST_CASE("scenario bindings") {
  auto script = parse_scenario("JoinRequest $J='V2' $N='V1'  # comment\n\n  Leave_Send\n");
  REQUIRE(script.size() == 2);
  CHECK(script[0].rule == "JoinRequest");
  CHECK(script[0].bindings.size() == 2);
  CHECK(script[0].line == 1);
  CHECK(script[1].line == 3);
  CHECK(script[1].bindings.empty());
}

TEST_CASE("reveal rules expose the key and log Rev") {
  auto script = load_scenario(kAssets + "/scenarios/static_full_run.txt");
  script.push_back({"Reveal_pgk", {}, 0});
  ExecutionState s = run_scenario(static_model(), script);
  const auto& last = s.trace.back().actions;
  REQUIRE(last.size() == 1);
  CHECK(last[0].name == "Rev");
  CHECK(to_string(last[0].args[0]) == "'pgk'");
  for (const Term& k : secret_values(s.trace, "pgk")) CHECK(s.knowledge.derivable(k));
}

TEST_CASE("reveal excuses only dependent classes") {
  ExecutionState s = run_file(static_model(), "static_reveal_jrek.txt");
  auto x = extract(static_model());
  // V2's jrek opens V2's eJoin, which carries ppk and pgk. V3's join stays closed.
  for (const char* c : {"eJoin", "ppk", "pgk"}) CHECK(s.knowledge.derivable(secret_values(s.trace, c).at(0)));
  CHECK_FALSE(s.knowledge.derivable(secret_values(s.trace, "eJoin").at(1)));
  CHECK(check_secrecy(s.trace, s.knowledge, &x.dag).empty());

  // Without dependency information only jrek itself is excused.
  std::set<std::string> flagged;
  for (const auto& v : check_secrecy(s.trace, s.knowledge)) flagged.insert(v.action.name);
  CHECK(flagged.count("Secret_pgk"));
  CHECK_FALSE(flagged.count("Secret_jrek"));
}

TEST_CASE("leaked key without a reveal is a violation") {
  ExecutionState s = run_file(static_model(), "static_full_run.txt");
  auto pgk = secret_values(s.trace, "pgk");
  REQUIRE(pgk.size() == 1);
  KnowledgeSet leaked = s.knowledge;
  leaked.add(pgk[0]);
  auto x = extract(static_model());
  auto v = check_secrecy(s.trace, leaked, &x.dag);
  std::multiset<std::string> names;
  for (const auto& e : v) names.insert(e.action.name);
  CHECK(names.count("Secret_pgk") == 1);
  // Keys sent under pgk fall with it; nothing else does.
  CHECK(names == std::multiset<std::string>{"Secret_eKUR", "Secret_eLeave", "Secret_pgk"});
  for (const auto& e : v) CHECK(e.property == "secrecy");
}

TEST_CASE("replay restriction") {
  CHECK(check_replay_restriction({}));
  Trace t{step(1, "A", {act("Message", {"'m'", "'V1'"})}), step(2, "B", {act("Message", {"'m'", "'V2'"})})};
  CHECK(check_replay_restriction(t));
  t.push_back(step(3, "C", {act("Message", {"'m'", "'V1'"})}));
  CHECK_FALSE(check_replay_restriction(t));
}

TEST_CASE("agreement levels on hand-built traces") {
  Fact honest = act("Honest", {"'P'", "'L'"});
  Fact running = act("Running", {"'L'", "'J'", "'d1'"});
  Fact commit = act("Commit", {"'J'", "'L'", "'d2'"});

  Trace differing{step(1, "S", {honest}), step(2, "R", {running}), step(3, "C", {commit})};
  CHECK(check_agreement(differing, Agreement::Aliveness).empty());
  CHECK(check_agreement(differing, Agreement::WeakAgreement).empty());
  auto v = check_agreement(differing, Agreement::NonInjectiveAgreement);
  REQUIRE(v.size() == 1);
  CHECK(v[0].step == 3);
  CHECK(v[0].property == "noninjective-agreement");

  // Running after the Commit does not count.
  Trace late{step(1, "S", {honest}), step(2, "C", {commit}), step(3, "R", {running})};
  CHECK(check_agreement(late, Agreement::WeakAgreement).size() == 1);

  // Commits to parties never declared honest are not checked.
  Trace dishonest{step(1, "C", {act("Commit", {"'J'", "'E'", "'d'"})})};
  CHECK(check_agreement(dishonest, Agreement::Aliveness).empty());

  // A reveal by an honest party excuses the trace.
  Trace revealed = late;
  revealed.push_back(step(4, "Rev", {act("Rev", {"'ltk'", "'L'", "'x'"})}));
  CHECK(check_agreement(revealed, Agreement::WeakAgreement).empty());
}

TEST_CASE("agreement names round-trip") {
  for (auto a : {Agreement::Aliveness, Agreement::WeakAgreement, Agreement::NonInjectiveAgreement})
    CHECK(parse_agreement(to_string(a)) == a);
  CHECK(parse_agreement("non_injective_agreement") == Agreement::NonInjectiveAgreement);
  CHECK_FALSE(parse_agreement("injective"));
}

TEST_CASE("misbinding run breaks agreement on the variant only") {
  ExecutionState s = run_file(nomatch_model(), "nomatch_misbinding.txt");
  CHECK(check_agreement(s.trace, Agreement::Aliveness).empty());
  CHECK(check_agreement(s.trace, Agreement::WeakAgreement).size() == 1);
  CHECK(check_agreement(s.trace, Agreement::NonInjectiveAgreement).size() == 1);
  CHECK_THROWS_AS(run_file(static_model(), "nomatch_misbinding.txt"), StuckScenario);
}

TEST_CASE("linear facts are consumed once") {
  Model m = parse_model(R"(theory T begin
rule Make: [ Fr(~k) ] --> [ Tok(~k) ]
rule Pair: [ Tok(a), Tok(b) ] --[ Eq(a, b) ]-> [ Out(a) ]
rule Distinct: [ Tok(a), Tok(b) ] --[ Neq(a, b) ]-> [ ]
end)");
  Executor ex(m);
  ExecutionState s = ex.initial_state();
  s = ex.fire(s, ex.instances(0, s).at(0));
  // One token cannot fill two premises.
  CHECK(ex.instances(1, s).empty());
  s = ex.fire(s, ex.instances(0, s).at(0));
  CHECK(ex.instances(1, s).empty());
  auto distinct = ex.instances(2, s);
  CHECK(distinct.size() == 2);
  s = ex.fire(s, distinct[0]);
  CHECK(s.linear.empty());
}

TEST_CASE("attacker input is limited to derivable terms") {
  Model m = parse_model(R"(theory T begin
rule Pub: [ ] --[ Const('c') ]-> [ ]
rule Get: [ In(x) ] --[ Got(x) ]-> [ ]
rule Sec: [ Fr(~s) ] --> [ Out(senc(~s, ~s)) ]
end)");
  Executor ex(m);
  ExecutionState s = ex.initial_state();
  for (const auto& inst : ex.instances(1, s)) {
    const Term& x = inst.actions.at(0).args.at(0);
    CHECK(x.kind() == TermKind::Constant);
  }
  CHECK_FALSE(ex.instances(1, s).empty());
  s = ex.fire(s, ex.instances(2, s).at(0));
  for (const auto& inst : ex.instances(1, s))
    CHECK(inst.actions.at(0).args.at(0) != Term::fresh_name("s.1"));
}

TEST_CASE("fresh budget bounds minting") {
  Model m = parse_model("theory T begin\nrule Make: [ Fr(~k) ] --> [ Out(~k) ]\nend");
  Executor ex(m, {0, 2});
  ExecutionState s = ex.initial_state();
  s = ex.fire(s, ex.instances(0, s).at(0));
  s = ex.fire(s, ex.instances(0, s).at(0));
  CHECK(s.fresh_minted == 2);
  CHECK(ex.instances(0, s).empty());
  CHECK(s.knowledge.derivable(Term::fresh_name("k.2")));
}

TEST_CASE("secrecy edges are realized by the full run") {
  ExecutionState s = run_file(static_model(), "static_full_run.txt");
  auto x = extract(static_model());
  std::size_t secrecy_edges = 0;
  for (const auto& e : x.dag.edges()) secrecy_edges += e.secrecy;
  CHECK(secrecy_edges >= 5);
  CHECK(keyorder::testing::unrealized_secrecy_edges(x.dag, s).empty());
}

TEST_CASE("bounded search reproduces the receiver-check findings") {
  SearchBounds bounds{12, 6, 6};
  SearchProperty weak{SearchProperty::Agreement, Agreement::WeakAgreement, {}};
  SearchOptions insider{{"insider"}, nullptr, 2};
  SearchResult found = search_attack(nomatch_model(), weak, bounds, insider);
  REQUIRE(found.attack);
  CHECK(found.violations.size() == 1);
  CHECK(found.setup_steps == 5);
  CHECK(found.attack->back().rule == "JoinResponse_Receive");
  CHECK(found.attack->size() <= found.setup_steps + bounds.max_steps);

  SearchProperty nonin{SearchProperty::Agreement, Agreement::NonInjectiveAgreement, {}};
  CHECK(search_attack(nomatch_model(), nonin, bounds, insider).attack);
  CHECK_FALSE(search_attack(static_model(), weak, bounds, insider).attack);
  // The misbinding needs a certified insider.
  CHECK_FALSE(search_attack(nomatch_model(), weak, {8, 4, 6}, {{}, nullptr, 2}).attack);
}

TEST_CASE("an insider joiner legitimately learns the group key") {
  SearchProperty pgk{SearchProperty::Secrecy, Agreement::WeakAgreement, "pgk"};
  CHECK_FALSE(search_attack(static_model(), pgk, {4, 4, 6}, {{}, nullptr, 2}).attack);
  auto r = search_attack(static_model(), pgk, {4, 4, 6}, {{"insider"}, nullptr, 2});
  REQUIRE(r.attack);
  CHECK(r.attack->back().rule == "JoinResponse_Leader");
}

TEST_CASE("search result does not depend on the thread count") {
  SearchBounds bounds{8, 4, 6};
  SearchProperty weak{SearchProperty::Agreement, Agreement::WeakAgreement, {}};
  auto one = search_attack(nomatch_model(), weak, bounds, {{"insider"}, nullptr, 1});
  auto four = search_attack(nomatch_model(), weak, bounds, {{"insider"}, nullptr, 4});
  REQUIRE(one.attack);
  REQUIRE(four.attack);
  CHECK(*one.attack == *four.attack);
}

TEST_CASE("secrecy search finds reveals only when enabled") {
  SearchBounds bounds{3, 3, 6};
  SearchProperty pgk{SearchProperty::Secrecy, Agreement::WeakAgreement, "ltk_CA"};
  CHECK_FALSE(search_attack(static_model(), pgk, bounds, {{}, nullptr, 2}).attack);

  // A synthetic leak: the key is published outright.
  Model m = parse_model(R"(theory T begin
rule Gen: [ Fr(~k) ] --[ Secret_k('P', ~k) ]-> [ Key(~k) ]
rule Leak: [ Key(k) ] --> [ Out(k) ]
end)");
  SearchProperty k{SearchProperty::Secrecy, Agreement::WeakAgreement, "k"};
  auto r = search_attack(m, k, {3, 2, 4}, {{}, nullptr, 1});
  REQUIRE(r.attack);
  CHECK(r.attack->size() == 2);
  CHECK(r.violations.at(0).action.name == "Secret_k");
}

TEST_CASE("trace output formats") {
  ExecutionState s = run_file(nomatch_model(), "nomatch_misbinding.txt");
  auto v = check_agreement(s.trace, Agreement::WeakAgreement);

  std::ostringstream text;
  write_trace_text(text, s.trace);
  CHECK(text.str().find("1 CA_Setup Setup()") == 0);
  CHECK(text.str().find("9 JoinResponse_Receive Message(") != std::string::npos);

  auto doc = nlohmann::json::parse(trace_to_json("ensemble_static_nomatch", s.trace, v));
  CHECK(doc["model"] == "ensemble_static_nomatch");
  REQUIRE(doc["steps"].size() == s.trace.size());
  CHECK(doc["steps"][6]["rule"] == "JoinRequest");
  CHECK(doc["steps"][6]["bindings"]["$J"] == "'V2'");
  CHECK(doc["steps"][0]["actions"][0] == "Setup()");
  REQUIRE(doc["violations"].size() == 1);
  CHECK(doc["violations"][0]["property"] == "weak-agreement");
  CHECK(doc["violations"][0]["step"] == 9);
}

TEST_CASE("revealing a join request key exposes the transported keys") {
  ExecutionState s = run_file(static_model(), "static_full_run.txt");
  KnowledgeSet k = s.knowledge;
  k.add(secret_values(s.trace, "jrek").at(0));
  for (const char* c : {"eJoin", "ppk", "pgk"}) CHECK(k.derivable(secret_values(s.trace, c).at(0)));
  CHECK_FALSE(k.derivable(secret_values(s.trace, "ltk").at(0)));
}

TEST_CASE("CAM is applicable once the PKI is set up") {
  ExecutionState s = run_scenario(static_model(), parse_scenario("CA_Setup\nVehicle_Setup_V1\n"));
  Executor ex(static_model());
  std::size_t cam = 0;
  while (static_model().rules[cam].name != "CAM_Leader") ++cam;
  CHECK_FALSE(ex.instances(cam, s).empty());
  CHECK(ex.instances(cam, ex.initial_state()).empty());
}
