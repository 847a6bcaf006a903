#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <iostream>

#include "keyorder/executor.hpp"
#include "keyorder/oracle.hpp"
#include "keyorder/synth.hpp"

using namespace keyorder;

namespace {

constexpr const char* kVersion = "keyorder 0.1.0";

/// Exit statuses.
constexpr int kOk = 0, kFailure = 1, kFindings = 2;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Model load_checked(const std::string& path) {
  Model m = load_model(path);
  auto diags = validate(m);
  for (const auto& d : diags) std::cerr << path << ": " << to_string(d) << '\n';
  if (has_errors(diags)) throw Failure("model has errors");
  return m;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Failure("cannot write " + path);
  out << content;
}

/// Writes to `path`, or to standard output when it is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    write_file(path, content);
}

void report_cycle(const CyclicDependency& e) {
  std::cerr << "cyclic key dependency:";
  for (std::size_t i = 0; i < e.cycle().size(); ++i) std::cerr << (i ? " -> " : " ") << e.cycle()[i];
  std::cerr << '\n';
}

// ------------------------------------------------------------------ extract

struct ExtractArgs {
  std::string model, dot, order;
  bool extended = false;
};

int cmd_extract(const ExtractArgs& a) {
  Model m = load_checked(a.model);
  try {
    Extraction x = extract(m, {a.extended});
    for (const auto& w : x.warnings) std::cerr << "warning: " << w << '\n';
    if (!a.dot.empty()) emit(a.dot, emit_dot(x.dag));
    if (!a.order.empty()) emit(a.order, emit_order(x.dag));
    if (a.dot.empty() && a.order.empty()) std::cout << emit_order(x.dag);
    return kOk;
  } catch (const CyclicDependency& e) {
    report_cycle(e);
    return kFindings;
  }
}

// -------------------------------------------------------------------- graph

struct GraphArgs {
  std::string model;
  bool reduced = false, dot = false, extended = false;
};

int cmd_graph(const GraphArgs& a) {
  Model m = load_checked(a.model);
  try {
    KeyClassDag d = extract(m, {a.extended}).dag;
    if (a.reduced) d = transitive_reduction(d);
    if (a.dot) {
      std::cout << emit_dot(d);
      return kOk;
    }
    for (const auto& c : d.classes()) std::cout << "class " << c.label << " members=" << c.members.size() << '\n';
    for (const auto& e : d.edges()) {
      std::cout << d.label(e.from) << " -> " << d.label(e.to);
      if (e.secrecy) std::cout << " secrecy";
      if (e.authenticity) std::cout << " authenticity";
      std::cout << '\n';
    }
    std::cout << "# chain " << max_chain_length(d) << '\n';
    return kOk;
  } catch (const CyclicDependency& e) {
    report_cycle(e);
    return kFindings;
  }
}

// ------------------------------------------------------------------- oracle

int cmd_oracle(const std::string& config, const std::string& lemma) {
  return serve(load_oracle_config(config), lemma, std::cin, std::cout, std::cerr);
}

// ---------------------------------------------------------------------- gen

struct GenArgs {
  std::size_t depth = 2;
  bool reuse = false;
  std::string order = "dep", out;
};

int cmd_gen(const GenArgs& a) {
  ChainSpec spec;
  spec.depth = a.depth;
  spec.reuse = a.reuse;
  spec = parse_ordering(a.order, spec);
  emit(a.out, serialize(generate_chain_model(spec)));
  return kOk;
}

// ---------------------------------------------------------------------- run

/// Writes the text trace to `text` (standard output when empty) and the JSON
/// document to `json` when set.
void write_trace(const Model& m, const Trace& t, const std::vector<Violation>& v, const std::string& text,
                 const std::string& json) {
  std::ostringstream os;
  write_trace_text(os, t);
  emit(text, os.str());
  if (!json.empty()) write_file(json, trace_to_json(m.name, t, v));
}

void report(const std::vector<Violation>& v) {
  for (const auto& x : v)
    std::cerr << x.property << " violated at step " << x.step << ": " << to_string(x.action) << " (" << x.detail
              << ")\n";
}

std::optional<KeyClassDag> try_dag(const Model& m) {
  try {
    return extract(m).dag;
  } catch (const CyclicDependency&) {
    return std::nullopt;
  }
}

struct RunArgs {
  std::string model, scenario, trace, json;
  int depth = 0;
};

int cmd_run(const RunArgs& a) {
  Model m = load_checked(a.model);
  ExecutionState s;
  try {
    s = run_scenario(m, load_scenario(a.scenario), {a.depth, SIZE_MAX});
  } catch (const StuckScenario& e) {
    std::cerr << a.scenario << ": " << e.what() << '\n';
    return kFailure;
  }
  auto dag = try_dag(m);
  std::vector<Violation> v = check_secrecy(s.trace, s.knowledge, dag ? &*dag : nullptr);
  for (auto kind : {Agreement::Aliveness, Agreement::WeakAgreement, Agreement::NonInjectiveAgreement}) {
    auto more = check_agreement(s.trace, kind);
    v.insert(v.end(), more.begin(), more.end());
  }
  if (!check_replay_restriction(s.trace)) v.push_back({"replay", 0, Fact{"Message", false, {}, FactAnnotation::None}, "repeated Message action"});
  write_trace(m, s.trace, v, a.trace, a.json);
  report(v);
  return v.empty() ? kOk : kFindings;
}

// -------------------------------------------------------------------- check

struct CheckArgs {
  std::string model, property = "weak-agreement", secret, trace, json;
  std::size_t max_steps = 12, fresh = 6;
  int depth = 6;
  unsigned threads = 0;
  std::vector<std::string> reveals;
};

int cmd_check(const CheckArgs& a) {
  Model m = load_checked(a.model);
  SearchProperty prop;
  if (a.property == "secrecy") {
    prop.kind = SearchProperty::Secrecy;
    prop.secrecy_class = a.secret;
  } else if (auto kind = parse_agreement(a.property)) {
    prop.agreement = *kind;
  } else {
    throw Failure("unknown property '" + a.property + "'");
  }
  SearchOptions opts;
  opts.reveals = {a.reveals.begin(), a.reveals.end()};
  opts.threads = a.threads;
  SearchResult r = search_attack(m, prop, {a.max_steps, a.fresh, a.depth}, opts);
  std::cerr << "explored " << r.states << " states\n";
  if (!r.attack) {
    std::cerr << "no violation of " << a.property << " within " << a.max_steps << " steps\n";
    return kOk;
  }
  write_trace(m, *r.attack, r.violations, a.trace, a.json);
  report(r.violations);
  return kFindings;
}

// ------------------------------------------------------------------ closure

struct ClosureArgs {
  std::string model, scenario;
  std::vector<std::string> reveals;
};

int cmd_closure(const ClosureArgs& a) {
  Model m = load_checked(a.model);
  ExecutionState s;
  try {
    s = run_scenario(m, load_scenario(a.scenario));
  } catch (const StuckScenario& e) {
    std::cerr << a.scenario << ": " << e.what() << '\n';
    return kFailure;
  }
  KnowledgeSet k = s.knowledge;
  for (const auto& step : s.trace)
    for (const auto& act : step.actions)
      for (const auto& label : a.reveals)
        if (act.name == "Secret_" + label && !act.args.empty()) k.add(act.args.back());
  // One line per declared secret the attacker can derive.
  std::set<std::pair<std::string, std::string>> known;
  for (const auto& step : s.trace)
    for (const auto& act : step.actions)
      if (act.name.rfind("Secret_", 0) == 0 && !act.args.empty() && k.derivable(act.args.back()))
        known.emplace(act.name.substr(7), to_string(act.args.back()));
  for (const auto& [label, value] : known) std::cout << label << ' ' << value << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-dependency ordering toolkit for security protocol models"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  ExtractArgs ex;
  auto* extract_cmd = app.add_subcommand("extract", "Extract the key-class dependency order");
  extract_cmd->add_option("model", ex.model, "Model file (.spk)")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--dot", ex.dot, "Write the DAG as DOT");
  extract_cmd->add_option("--order", ex.order, "Write the priority order");
  extract_cmd->add_flag("--extended-authenticity", ex.extended, "Keys carried under encryption add authenticity edges");

  GraphArgs gr;
  auto* graph_cmd = app.add_subcommand("graph", "Print the key-class graph");
  graph_cmd->add_option("model", gr.model, "Model file (.spk)")->required()->check(CLI::ExistingFile);
  graph_cmd->add_flag("--reduced", gr.reduced, "Transitive reduction");
  graph_cmd->add_flag("--dot", gr.dot, "DOT instead of text");
  graph_cmd->add_flag("--extended-authenticity", gr.extended, "Keys carried under encryption add authenticity edges");

  std::string oracle_config, oracle_lemma;
  auto* oracle_cmd = app.add_subcommand("oracle", "Rank prover goals read from standard input");
  oracle_cmd->add_option("--config", oracle_config, "Oracle configuration")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("lemma", oracle_lemma, "Lemma under proof")->required();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic key-chain model");
  gen_cmd->add_option("--depth", gen.depth, "Chain depth (even, >= 2)")->required();
  gen_cmd->add_flag("--reuse", gen.reuse, "Mark secrecy lemmas [reuse]");
  gen_cmd->add_option("--order", gen.order, "Lemma order: dep, none or rand:SEED");
  gen_cmd->add_option("-o,--output", gen.out, "Output file (default: standard output)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario and check all properties on its trace");
  run_cmd->add_option("model", run.model, "Model file (.spk)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", run.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--trace", run.trace, "Text trace output (default: standard output)");
  run_cmd->add_option("--json", run.json, "JSON trace output");
  run_cmd->add_option("--depth", run.depth, "Attacker composition depth (0: model default)");

  CheckArgs chk;
  auto* check_cmd = app.add_subcommand("check", "Bounded attack search");
  check_cmd->add_option("model", chk.model, "Model file (.spk)")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--property", chk.property,
                        "aliveness, weak-agreement, noninjective-agreement or secrecy");
  check_cmd->add_option("--secret", chk.secret, "Key class for --property secrecy (default: all)");
  check_cmd->add_option("--max-steps", chk.max_steps, "Protocol steps after setup");
  check_cmd->add_option("--fresh", chk.fresh, "Fresh names minted after setup");
  check_cmd->add_option("--depth", chk.depth, "Attacker composition depth");
  check_cmd->add_option("--reveal", chk.reveals, "Enable the reveal rule of a key class");
  check_cmd->add_option("--threads", chk.threads, "Worker threads (0: hardware count)");
  check_cmd->add_option("--trace", chk.trace, "Text trace output (default: standard output)");
  check_cmd->add_option("--json", chk.json, "JSON trace output");

  ClosureArgs clo;
  auto* closure_cmd = app.add_subcommand("closure", "Secrets derivable after a scenario and reveals");
  closure_cmd->add_option("model", clo.model, "Model file (.spk)")->required()->check(CLI::ExistingFile);
  closure_cmd->add_option("--scenario", clo.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  closure_cmd->add_option("--reveal", clo.reveals, "Give the attacker every instance of a key class");

  for (auto* sub : app.get_subcommands({})) sub->set_version_flag("--version", kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*extract_cmd) return cmd_extract(ex);
    if (*graph_cmd) return cmd_graph(gr);
    if (*oracle_cmd) return cmd_oracle(oracle_config, oracle_lemma);
    if (*gen_cmd) return cmd_gen(gen);
    if (*run_cmd) return cmd_run(run);
    if (*check_cmd) return cmd_check(chk);
    if (*closure_cmd) return cmd_closure(clo);
  } catch (const std::exception& e) {
    std::cerr << "keyorder: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
