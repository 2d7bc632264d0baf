#pragma once

#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ranagent/agent/graph.hpp"

namespace httplib {
class Server;
}

namespace ranagent::gateway {

/// Ordered, gap-free event log of one episode with blocking reads for
/// stream followers.
class EventChannel {
 public:
  /// Stamps `seq` (1, 2, ...) into the event and stores it.
  void publish(json event);
  void close();

  /// Events with seq > after, waiting up to `timeout` for at least one when
  /// none are available yet. `closed` reports whether the stream has ended.
  std::vector<json> read_after(std::int64_t after, std::chrono::milliseconds timeout, bool& closed) const;
  std::vector<json> all() const;

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<json> events_;
  bool closed_ = false;
};

struct IntentRequest {
  std::string text;
  std::string backend;
  std::optional<int> step_budget;
  std::optional<std::size_t> top_k;
};

/// Throws Error{kValidation} for malformed bodies.
IntentRequest intent_from_json(const json& body);

struct GatewayOptions {
  std::string fixture_path;
  std::string backends_path;          ///< empty: scripted backend from rules_path
  std::string rules_path;             ///< used when backends_path is empty
  std::string default_backend = "scripted";
  std::string answers_path;           ///< empty: in-memory answer log
  std::string audit_path;             ///< empty: audit kept in memory only
  agent::AgentOptions agent;
  /// Simulator tick period for the background clock; 0 disables it.
  int tick_ms = 0;
};

/// Backends from a backends file ({"backends": [...]}, entries that cannot
/// be built are skipped with a warning on stderr), or the scripted backend
/// from a rule table when `backends_path` is empty. Throws Error{kUsage}.
std::map<std::string, std::unique_ptr<agent::Backend>> load_backends(const std::string& backends_path,
                                                                     const std::string& rules_path);

enum class EpisodeStatus { kQueued, kRunning, kDone };
std::string_view to_string(EpisodeStatus s);

/// Hosts one deployment, its backends and the answer log, runs submitted
/// intents on a worker thread in submission order and serves the HTTP API.
class Gateway {
 public:
  Gateway(std::unique_ptr<platform::Platform> platform, std::map<std::string, std::unique_ptr<agent::Backend>> backends,
          GatewayOptions options);
  /// Loads fixture and backends from files. Throws Error{kUsage} when a
  /// file is missing.
  static std::unique_ptr<Gateway> from_options(const GatewayOptions& options);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Queues an intent; returns the episode id. Throws kValidation for blank
  /// text, kNotFound for an unknown backend.
  std::string submit(const IntentRequest& request);
  /// Blocks until the episode is done; false on timeout or unknown id.
  bool wait(const std::string& id, std::chrono::milliseconds timeout = std::chrono::minutes(5)) const;

  std::optional<json> episode_json(const std::string& id) const;
  std::shared_ptr<const EventChannel> events(const std::string& id) const;
  json list_episodes() const;
  json backends_json() const;
  json topology() const;

  platform::Platform& platform() { return *platform_; }
  agent::AnswerLog& answers() { return *answers_; }

  /// Registers every route on `server`.
  void bind(httplib::Server& server);
  /// Serves on host:port in a background thread; returns the bound port
  /// (port 0 picks a free one). Throws Error{kUsage} when binding fails.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Entry {
    std::string id;
    IntentRequest request;
    agent::Prompt prompt;
    EpisodeStatus status = EpisodeStatus::kQueued;
    std::optional<agent::Episode> episode;
    std::shared_ptr<EventChannel> channel = std::make_shared<EventChannel>();
    std::int64_t submitted_at_ms = 0;
  };

  void worker_loop();
  void ticker_loop();
  std::shared_ptr<Entry> find(const std::string& id) const;

  std::unique_ptr<platform::Platform> platform_;
  std::map<std::string, std::unique_ptr<agent::Backend>> backends_;
  GatewayOptions options_;
  std::unique_ptr<agent::AnswerLog> answers_;
  std::unique_ptr<std::ofstream> audit_out_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  std::vector<std::string> order_;
  std::deque<std::shared_ptr<Entry>> queue_;
  bool stopping_ = false;
  std::thread worker_;
  std::thread ticker_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

}  // namespace ranagent::gateway
