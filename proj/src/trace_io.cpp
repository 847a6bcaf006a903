#include <json.hpp>
#include <ostream>

#include "keyorder/executor.hpp"

namespace keyorder {

void write_trace_text(std::ostream& os, const Trace& t) {
  for (const auto& step : t) {
    if (step.actions.empty()) os << step.step << ' ' << step.rule << '\n';
    for (const auto& a : step.actions) os << step.step << ' ' << step.rule << ' ' << to_string(a) << '\n';
  }
}

std::string trace_to_json(const std::string& model_name, const Trace& t,
                          const std::vector<Violation>& violations) {
  nlohmann::ordered_json doc;
  doc["model"] = model_name;
  doc["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : t) {
    nlohmann::ordered_json s;
    s["step"] = step.step;
    s["rule"] = step.rule;
    s["bindings"] = nlohmann::ordered_json::object();
    for (const auto& [var, val] : step.subst) s["bindings"][to_string(var)] = to_string(val);
    s["actions"] = nlohmann::ordered_json::array();
    for (const auto& a : step.actions) s["actions"].push_back(to_string(a));
    doc["steps"].push_back(std::move(s));
  }
  doc["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations)
    doc["violations"].push_back(
        {{"property", v.property}, {"step", v.step}, {"action", to_string(v.action)}, {"detail", v.detail}});
  return doc.dump(2) + "\n";
}

}  // namespace keyorder
