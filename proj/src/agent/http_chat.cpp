#include "ranagent/agent/http_chat.hpp"

#include <httplib.h>

#include "ranagent/agent/graph.hpp"
#include "ranagent/common/error.hpp"

namespace ranagent::agent {

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {
  profile_.name = config_.name;
  profile_.kind = BackendKind::kHttpChat;
  profile_.metadata = config_.metadata;
  profile_.metadata["model"] = config_.model;
  profile_.metadata["endpoint"] = config_.endpoint;

  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::kUsage, "backend '" + config_.name + "': endpoint must be http(s)://host[:port]/path");
  const auto scheme = config_.endpoint.substr(0, scheme_end);
  tls_ = scheme == "https";
  if (!tls_ && scheme != "http") throw Error(ErrorCode::kUsage, "backend '" + config_.name + "': unsupported scheme " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (tls_) throw Error(ErrorCode::kUsage, "backend '" + config_.name + "': built without TLS support");
#endif
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  host_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpChatBackend::complete(const json& transcript) {
  json user = transcript;
  user.erase("system");
  user.erase("tools");
  std::string system = system_preamble();
  if (transcript.contains("tools")) system += "\nTools:\n" + transcript["tools"].dump();
  const json body = {{"model", config_.model},
                     {"temperature", config_.temperature},
                     {"messages", json::array({{{"role", "system"}, {"content", system}},
                                               {{"role", "user"}, {"content", user.dump()}}})}};

  httplib::Client cli(host_);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                             static_cast<time_t>((config_.timeout_ms % 1000) * 1000));
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::kBackend, config_.name + ": request failed (" + httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    throw Error(ErrorCode::kBackend, config_.name + ": HTTP " + std::to_string(res->status));
  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw Error(ErrorCode::kBackend, config_.name + ": reply is not JSON");
  const json* content = find_path(reply, "choices");
  if (!content || !content->is_array() || content->empty() || !(*content)[0].contains("message"))
    throw Error(ErrorCode::kBackend, config_.name + ": reply has no choices[0].message");
  const auto& msg = (*content)[0]["message"];
  if (!msg.contains("content") || !msg["content"].is_string())
    throw Error(ErrorCode::kBackend, config_.name + ": reply message has no content");
  return msg["content"].get<std::string>();
}

}  // namespace ranagent::agent
