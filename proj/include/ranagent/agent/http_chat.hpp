#pragma once

#include <string>

#include "ranagent/agent/backend.hpp"

namespace ranagent::agent {

struct HttpChatConfig {
  std::string name;
  std::string endpoint;  ///< http://host:port/path of a chat-completions endpoint
  std::string model;
  int timeout_ms = 30000;
  double temperature = 0.0;
  std::string api_key;
  json metadata = json::object();
};

/// One chat-completions request per model turn. The transcript is sent as
/// the user message; the reply's first choice content is the turn.
class HttpChatBackend : public Backend {
 public:
  explicit HttpChatBackend(HttpChatConfig config);

  const BackendProfile& profile() const override { return profile_; }
  std::string complete(const json& transcript) override;

 private:
  HttpChatConfig config_;
  BackendProfile profile_;
  std::string host_;
  std::string path_;
  bool tls_ = false;
};

}  // namespace ranagent::agent
