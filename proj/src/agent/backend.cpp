#include "ranagent/agent/backend.hpp"

#include <cstdlib>
#include <filesystem>

#include "ranagent/agent/http_chat.hpp"
#include "ranagent/agent/scripted.hpp"
#include "ranagent/common/error.hpp"

namespace ranagent::agent {

json to_json(const BackendProfile& p) {
  return {{"name", p.name}, {"kind", p.kind == BackendKind::kScripted ? "scripted" : "http-chat"}, {"metadata", p.metadata}};
}

std::optional<ModelTurn> parse_turn(const std::string& raw) {
  // Chat models like to wrap JSON in prose or code fences; take the
  // outermost object.
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  const json doc = json::parse(raw.substr(open, close - open + 1), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;

  ModelTurn turn;
  if (doc.contains("tool")) {
    if (!doc["tool"].is_string() || doc["tool"].get<std::string>().empty()) return std::nullopt;
    turn.type = ModelTurn::Type::kToolCall;
    turn.tool = doc["tool"].get<std::string>();
    if (doc.contains("arguments")) {
      if (!doc["arguments"].is_object()) return std::nullopt;
      turn.arguments = doc["arguments"];
    }
    return turn;
  }
  if (doc.contains("answer")) {
    if (!doc["answer"].is_string() || doc.value("stop", false) != true) return std::nullopt;
    turn.type = ModelTurn::Type::kAnswer;
    turn.answer = doc["answer"].get<std::string>();
    return turn;
  }
  if (doc.contains("branch") && doc["branch"].is_string()) {
    turn.type = ModelTurn::Type::kRoute;
    turn.branch = doc["branch"].get<std::string>();
    return turn;
  }
  return std::nullopt;
}

std::unique_ptr<Backend> make_backend(const json& config, const std::string& base_dir) {
  const auto name = config.at("name").get<std::string>();
  const auto kind = config.at("kind").get<std::string>();
  if (kind == "scripted") {
    std::filesystem::path rules = config.at("rules").get<std::string>();
    if (rules.is_relative()) rules = std::filesystem::path(base_dir) / rules;
    auto backend = ScriptedBackend::from_file(rules.string(), name);
    if (config.contains("metadata")) backend->set_metadata(config["metadata"]);
    return backend;
  }
  if (kind == "http-chat") {
    HttpChatConfig c;
    c.name = name;
    c.endpoint = config.value("endpoint", std::string());
    if (config.contains("endpoint_env"))
      if (const char* env = std::getenv(config["endpoint_env"].get<std::string>().c_str())) c.endpoint = env;
    if (config.contains("api_key_env"))
      if (const char* env = std::getenv(config["api_key_env"].get<std::string>().c_str())) c.api_key = env;
    c.model = config.value("model", std::string());
    c.timeout_ms = config.value("timeout_ms", 30000);
    c.temperature = config.value("temperature", 0.0);
    c.metadata = config.value("metadata", json::object());
    if (c.endpoint.empty()) throw Error(ErrorCode::kUsage, "backend '" + name + "': no endpoint configured");
    return std::make_unique<HttpChatBackend>(c);
  }
  throw Error(ErrorCode::kUsage, "backend '" + name + "': unknown kind '" + kind + "'");
}

}  // namespace ranagent::agent
