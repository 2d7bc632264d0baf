#include "ranagent/agent/scripted.hpp"

#include <fstream>

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::agent {

namespace {

json expand_args(const json& value, const std::vector<std::string>& caps) {
  if (value.is_string()) {
    auto s = expand_captures(value.get<std::string>(), caps);
    auto colon = s.rfind(':');
    if (colon != std::string::npos) {
      const auto suffix = s.substr(colon + 1);
      const auto head = s.substr(0, colon);
      if (suffix == "int") return std::stoll(head);
      if (suffix == "num") return std::stod(head);
    }
    return s;
  }
  if (value.is_array()) {
    json out = json::array();
    for (const auto& v : value) out.push_back(expand_args(v, caps));
    return out;
  }
  if (value.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : value.items()) out[k] = expand_args(v, caps);
    return out;
  }
  return value;
}

json apply_filter(const json& v, const std::string& filter) {
  if (filter == "count") return v.is_array() ? json(v.size()) : json(v.is_null() ? 0 : 1);
  if (filter == "names") return apply_filter(v, "field:name");
  if (filter.rfind("field:", 0) == 0) {
    const auto key = filter.substr(6);
    json out = json::array();
    if (v.is_array())
      for (const auto& x : v)
        if (x.is_object() && x.contains(key)) out.push_back(x[key]);
    return out;
  }
  if (filter.rfind("where:", 0) == 0) {
    const auto eq = filter.find('=');
    const auto key = filter.substr(6, eq - 6);
    const auto want = eq == std::string::npos ? std::string("true") : filter.substr(eq + 1);
    json out = json::array();
    if (v.is_array())
      for (const auto& x : v)
        if (x.is_object() && x.contains(key) && render_value(x[key]) == want) out.push_back(x);
    return out;
  }
  if (filter == "flat") {
    json out = json::array();
    if (v.is_array())
      for (const auto& x : v) {
        if (x.is_array())
          for (const auto& y : x) out.push_back(y);
        else
          out.push_back(x);
      }
    return out;
  }
  if (filter == "first") return v.is_array() && !v.empty() ? v[0] : json(nullptr);
  if (filter == "yesno") return v.is_boolean() ? json(v.get<bool>() ? "yes" : "no") : v;
  if (filter == "join") return render_value(v);
  throw Error(ErrorCode::kValidation, "unknown template filter '" + filter + "'");
}

std::string render_final(const json& v) {
  if (v.is_null()) return "unknown";
  if (v.is_array() && v.empty()) return "none";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return render_value(v);
}

std::string hit_field(const json& hits, const std::string& ref) {
  // ref = "Kind/name:field"
  const auto colon = ref.rfind(':');
  const auto key = ref.substr(0, colon);
  const auto field = ref.substr(colon + 1);
  for (const auto& h : hits) {
    if (h.value("kind", std::string()) + "/" + h.value("name", std::string()) != key) continue;
    const std::regex re("(?:^|[ \\[])" + field + "=([^ ;\\]]+)");
    std::smatch m;
    const auto text = h.value("text", std::string());
    if (std::regex_search(text, m, re)) return m[1].str();
  }
  return "unknown";
}

bool failed_observation(const json& entry, std::string& why) {
  const json& obs = entry.contains("observation") ? entry["observation"] : json();
  if (entry.contains("ok")) {
    if (!entry["ok"].get<bool>()) why = "it was rejected";
    return !entry["ok"].get<bool>();
  }
  if (obs.contains("error")) {
    why = render_value(obs["error"]) + ": " + obs.value("message", std::string());
    return true;
  }
  if (obs.contains("preflight") && !obs["preflight"].value("passed", false)) {
    const auto& reasons = obs["preflight"]["reasons"];
    why = reasons.empty() ? "preflight failed"
                          : reasons[0].value("reason", std::string()) + ": " + reasons[0].value("message", std::string());
    return true;
  }
  if (obs.contains("result") && obs["result"].is_object() && !obs["result"].value("success", false)) {
    why = obs["result"].value("error", std::string("execution failed"));
    return true;
  }
  return false;
}

}  // namespace

std::string expand_captures(const std::string& text, const std::vector<std::string>& caps) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '$' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      const std::size_t n = static_cast<std::size_t>(text[i + 1] - '0');
      if (n < caps.size()) out += caps[n];
      ++i;
    } else {
      out += text[i];
    }
  }
  return out;
}

std::string render_template(const std::string& tmpl, const std::vector<json>& outputs, const json& hits) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find('{', i);
    if (open == std::string::npos) {
      out += tmpl.substr(i);
      break;
    }
    const auto close = tmpl.find('}', open);
    if (close == std::string::npos) throw Error(ErrorCode::kValidation, "unterminated template placeholder");
    out += tmpl.substr(i, open - i);
    const std::string token = tmpl.substr(open + 1, close - open - 1);
    if (token.rfind("hit:", 0) == 0) {
      out += hit_field(hits, token.substr(4));
    } else {
      std::vector<std::string> parts;
      std::size_t start = 0;
      for (std::size_t p = token.find('|'); p != std::string::npos; p = token.find('|', start)) {
        parts.push_back(token.substr(start, p - start));
        start = p + 1;
      }
      parts.push_back(token.substr(start));
      const auto colon = parts[0].find(':');
      const std::size_t idx = std::stoul(parts[0].substr(0, colon));
      const std::string path = colon == std::string::npos ? "" : parts[0].substr(colon + 1);
      json v;
      if (idx < outputs.size()) {
        if (path.empty()) {
          v = outputs[idx];
        } else if (const json* found = find_path(outputs[idx], path)) {
          v = *found;
        }
      }
      for (std::size_t f = 1; f < parts.size(); ++f) v = apply_filter(v, parts[f]);
      out += render_final(v);
    }
    i = close + 1;
  }
  return out;
}

ScriptedBackend::ScriptedBackend(const json& rules, std::string name) {
  profile_.name = std::move(name);
  profile_.kind = BackendKind::kScripted;
  for (const auto& r : rules.at("rules")) {
    Rule rule;
    rule.id = r.at("id").get<std::string>();
    rule.pattern = std::regex(r.at("pattern").get<std::string>(), std::regex::icase | std::regex::ECMAScript);
    rule.branch = r.at("branch").get<std::string>();
    for (const auto& c : r.value("calls", json::array())) rule.calls.push_back(c);
    rule.answer = r.at("answer").get<std::string>();
    rules_.push_back(std::move(rule));
  }
  profile_.metadata = rules.value("metadata", json::object());
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot open rule table " + path);
  return std::make_unique<ScriptedBackend>(json::parse(in), std::move(name));
}

const ScriptedBackend::Rule* ScriptedBackend::match(const std::string& prompt, std::smatch& m) const {
  for (const auto& r : rules_)
    if (std::regex_search(prompt, m, r.pattern)) return &r;
  return nullptr;
}

std::string ScriptedBackend::complete(const json& transcript) {
  const std::string prompt = transcript.at("prompt").get<std::string>();
  std::smatch m;
  const Rule* rule = match(prompt, m);
  if (transcript.value("phase", std::string()) == "route")
    return json{{"branch", rule ? rule->branch : "monitoring"}}.dump();
  if (!rule) return json{{"answer", kUnknownIntent}, {"stop", true}}.dump();

  std::vector<std::string> caps;
  for (const auto& g : m) caps.push_back(to_lower(g.str()));

  // Replay the visible history: completed calls and their outputs, and
  // whether the latest tool step failed.
  std::vector<json> outputs;
  std::string failure;
  std::string failed_tool;
  auto visit = [&](const json& entry) {
    std::string tool;
    if (entry.contains("tool")) tool = entry["tool"].get<std::string>();
    else if (entry.contains("action") && entry["action"].is_object() && entry["action"].contains("tool"))
      tool = entry["action"]["tool"].get<std::string>();
    if (tool.empty()) return;
    std::string why;
    if (failed_observation(entry, why)) {
      failure = why;
      failed_tool = tool;
      return;
    }
    failure.clear();
    if (entry.value("planned", false)) return;
    const auto node = entry.value("node", std::string());
    if (node == "deployment" && entry.contains("observation") && entry["observation"].contains("preflight"))
      return;  // planned, not yet executed
    outputs.push_back(entry.contains("observation") ? entry["observation"] : json());
  };
  for (const auto& e : transcript.value("summary", json::array())) visit(e);
  for (const auto& e : transcript.value("history", json::array())) visit(e);

  if (!failure.empty())
    return json{{"answer", "Could not complete the request: " + failed_tool + " failed (" + failure + ")."}, {"stop", true}}
        .dump();
  if (outputs.size() < rule->calls.size()) {
    const auto& call = rule->calls[outputs.size()];
    return json{{"tool", call.at("tool")}, {"arguments", expand_args(call.value("arguments", json::object()), caps)}}
        .dump();
  }
  const auto answer = render_template(expand_captures(rule->answer, caps), outputs,
                                      transcript.value("context", json::array()));
  return json{{"answer", answer}, {"stop", true}}.dump();
}

}  // namespace ranagent::agent
