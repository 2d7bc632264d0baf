#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "ranagent/common/json_util.hpp"

namespace ranagent::agent {

enum class BackendKind { kScripted, kHttpChat };

struct BackendProfile {
  std::string name;
  BackendKind kind = BackendKind::kScripted;
  /// Declared figures (coherence, latency_s, vram_gb, deployment) when known.
  json metadata = json::object();
};

json to_json(const BackendProfile& profile);

/// A language-model backend. `complete` receives the full transcript and
/// returns one raw model turn, which must be a JSON object of one of the
/// shapes:
///   {"branch": "monitoring" | "deployment" | "retrieval"}   (routing phase)
///   {"tool": "<name>", "arguments": {...}}
///   {"answer": "<text>", "stop": true}
/// Throws Error{kBackend} on transport failure or timeout.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const BackendProfile& profile() const = 0;
  virtual std::string complete(const json& transcript) = 0;
};

struct ModelTurn {
  enum class Type { kRoute, kToolCall, kAnswer };
  Type type = Type::kAnswer;
  std::string branch;
  std::string tool;
  json arguments = json::object();
  std::string answer;
};

/// Parses a raw turn; nullopt when it matches none of the shapes above.
std::optional<ModelTurn> parse_turn(const std::string& raw);

/// Backend from one entry of a backends config file:
///   {"name", "kind": "scripted", "rules": "<path>"}
///   {"name", "kind": "http-chat", "endpoint", "model", "timeout_ms",
///    "temperature", "endpoint_env"?, "api_key_env"?}
/// Relative rule paths resolve against `base_dir`.
std::unique_ptr<Backend> make_backend(const json& config, const std::string& base_dir = ".");

}  // namespace ranagent::agent
