#include "ranagent/gateway/gateway.hpp"

#include <httplib.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "ranagent/agent/scripted.hpp"
#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::gateway {

// ---------------------------------------------------------------- EventChannel

void EventChannel::publish(json event) {
  {
    std::lock_guard lock(mu_);
    event["seq"] = static_cast<std::int64_t>(events_.size()) + 1;
    events_.push_back(std::move(event));
  }
  cv_.notify_all();
}

void EventChannel::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::vector<json> EventChannel::read_after(std::int64_t after, std::chrono::milliseconds timeout, bool& closed) const {
  std::unique_lock lock(mu_);
  const auto have = [&] { return static_cast<std::int64_t>(events_.size()) > after || closed_; };
  cv_.wait_for(lock, timeout, have);
  std::vector<json> out;
  for (auto i = static_cast<std::size_t>(std::max<std::int64_t>(after, 0)); i < events_.size(); ++i)
    out.push_back(events_[i]);
  closed = closed_;
  return out;
}

std::vector<json> EventChannel::all() const {
  std::lock_guard lock(mu_);
  return events_;
}

// ---------------------------------------------------------------- requests

IntentRequest intent_from_json(const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::kValidation, "body must be a JSON object");
  for (const auto& [k, _] : body.items())
    if (k != "text" && k != "backend" && k != "options")
      throw Error(ErrorCode::kValidation, k + ": unknown field (overrides go under options)");
  IntentRequest r;
  if (!body.contains("text") || !body["text"].is_string()) throw Error(ErrorCode::kValidation, "text: required string");
  r.text = body["text"].get<std::string>();
  if (body.contains("backend")) {
    if (!body["backend"].is_string()) throw Error(ErrorCode::kValidation, "backend: must be a string");
    r.backend = body["backend"].get<std::string>();
  }
  if (body.contains("options")) {
    const auto& o = body["options"];
    if (!o.is_object()) throw Error(ErrorCode::kValidation, "options: must be an object");
    for (const auto& [k, v] : o.items()) {
      if (k == "step_budget") {
        if (!v.is_number_integer() || v.get<int>() < 2 || v.get<int>() > 64)
          throw Error(ErrorCode::kValidation, "options.step_budget: integer in [2, 64]");
        r.step_budget = v.get<int>();
      } else if (k == "k") {
        if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 100)
          throw Error(ErrorCode::kValidation, "options.k: integer in [1, 100]");
        r.top_k = v.get<std::size_t>();
      } else {
        throw Error(ErrorCode::kValidation, "options." + k + ": unknown option");
      }
    }
  }
  if (trim(r.text).empty()) throw Error(ErrorCode::kValidation, "text: must not be empty");
  return r;
}

std::string_view to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::kQueued: return "queued";
    case EpisodeStatus::kRunning: return "running";
    case EpisodeStatus::kDone: return "done";
  }
  return "queued";
}

// ---------------------------------------------------------------- Gateway

std::map<std::string, std::unique_ptr<agent::Backend>> load_backends(const std::string& backends_path,
                                                                     const std::string& rules_path) {
  std::map<std::string, std::unique_ptr<agent::Backend>> backends;
  if (!backends_path.empty()) {
    std::ifstream in(backends_path);
    if (!in) throw Error(ErrorCode::kUsage, "backends file not found: " + backends_path);
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("backends"))
      throw Error(ErrorCode::kUsage, backends_path + ": expected {\"backends\": [...]}");
    const auto base = std::filesystem::path(backends_path).parent_path().string();
    for (const auto& cfg : doc["backends"]) {
      try {
        auto b = agent::make_backend(cfg, base.empty() ? "." : base);
        const auto name = b->profile().name;
        backends.emplace(name, std::move(b));
      } catch (const Error& e) {
        std::cerr << "skipping backend " << cfg.value("name", std::string("?")) << ": " << e.what() << '\n';
      }
    }
  } else {
    if (rules_path.empty() || !std::filesystem::exists(rules_path))
      throw Error(ErrorCode::kUsage, "rule table not found: " + rules_path);
    backends.emplace("scripted", agent::ScriptedBackend::from_file(rules_path));
  }
  if (backends.empty()) throw Error(ErrorCode::kUsage, "no usable backends");
  return backends;
}


Gateway::Gateway(std::unique_ptr<platform::Platform> platform,
                 std::map<std::string, std::unique_ptr<agent::Backend>> backends, GatewayOptions options)
    : platform_(std::move(platform)), backends_(std::move(backends)), options_(std::move(options)) {
  answers_ = options_.answers_path.empty() ? std::make_unique<agent::AnswerLog>()
                                           : std::make_unique<agent::AnswerLog>(options_.answers_path);
  if (!options_.audit_path.empty()) {
    audit_out_ = std::make_unique<std::ofstream>(options_.audit_path, std::ios::app);
    if (!*audit_out_) throw Error(ErrorCode::kPersistence, "cannot open audit log " + options_.audit_path);
    platform_->tools().set_audit_sink([this](const json& line) {
      *audit_out_ << line.dump() << '\n';
      audit_out_->flush();
    });
  }
  worker_ = std::thread([this] { worker_loop(); });
  if (options_.tick_ms > 0) ticker_ = std::thread([this] { ticker_loop(); });
}

std::unique_ptr<Gateway> Gateway::from_options(const GatewayOptions& options) {
  if (options.fixture_path.empty() || !std::filesystem::exists(options.fixture_path))
    throw Error(ErrorCode::kUsage, "fixture not found: " + options.fixture_path);
  auto platform = platform::Platform::from_file(options.fixture_path);
  auto backends = load_backends(options.backends_path, options.rules_path);
  return std::make_unique<Gateway>(std::move(platform), std::move(backends), options);
}

Gateway::~Gateway() {
  stop();
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (ticker_.joinable()) ticker_.join();
}

std::string Gateway::submit(const IntentRequest& request) {
  auto entry = std::make_shared<Entry>();
  entry->request = request;
  if (entry->request.backend.empty()) entry->request.backend = options_.default_backend;
  if (!backends_.count(entry->request.backend))
    throw Error(ErrorCode::kNotFound, "unknown backend '" + entry->request.backend + "'");
  entry->prompt = agent::make_prompt(request.text);
  entry->id = entry->prompt.id;
  entry->submitted_at_ms = entry->prompt.received_at_ms;
  {
    std::lock_guard lock(mu_);
    entries_[entry->id] = entry;
    order_.push_back(entry->id);
    queue_.push_back(entry);
  }
  cv_.notify_all();
  return entry->id;
}

void Gateway::worker_loop() {
  for (;;) {
    std::shared_ptr<Entry> e;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      e = queue_.front();
      queue_.pop_front();
      e->status = EpisodeStatus::kRunning;
    }
    auto opts = options_.agent;
    if (e->request.step_budget) opts.step_budget = *e->request.step_budget;
    if (e->request.top_k) opts.top_k = *e->request.top_k;
    auto channel = e->channel;
    auto ep = agent::run_episode(e->prompt, *backends_.at(e->request.backend), *platform_, answers_.get(), opts,
                                 [&](const json& ev) { channel->publish(ev); });
    {
      std::lock_guard lock(mu_);
      e->episode = std::move(ep);
      e->status = EpisodeStatus::kDone;
    }
    channel->close();
    cv_.notify_all();
  }
}

void Gateway::ticker_loop() {
  std::unique_lock lock(mu_);
  while (!cv_.wait_for(lock, std::chrono::milliseconds(options_.tick_ms), [&] { return stopping_; })) {
    lock.unlock();
    platform_->advance(1);
    lock.lock();
  }
}

std::shared_ptr<Gateway::Entry> Gateway::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second;
}

bool Gateway::wait(const std::string& id, std::chrono::milliseconds timeout) const {
  auto e = find(id);
  if (!e) return false;
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return e->status == EpisodeStatus::kDone; });
}

std::optional<json> Gateway::episode_json(const std::string& id) const {
  auto e = find(id);
  if (!e) return std::nullopt;
  std::lock_guard lock(mu_);
  return json{{"id", e->id},
              {"status", to_string(e->status)},
              {"prompt", e->request.text},
              {"backend", e->request.backend},
              {"submitted_at_ms", e->submitted_at_ms},
              {"events", e->channel->all().size()},
              {"episode", e->episode ? agent::to_json(*e->episode) : json(nullptr)}};
}

std::shared_ptr<const EventChannel> Gateway::events(const std::string& id) const {
  auto e = find(id);
  return e ? e->channel : nullptr;
}

json Gateway::list_episodes() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& id : order_) {
    const auto& e = entries_.at(id);
    out.push_back({{"id", id},
                   {"status", to_string(e->status)},
                   {"prompt", e->request.text},
                   {"backend", e->request.backend},
                   {"submitted_at_ms", e->submitted_at_ms},
                   {"answer", e->episode ? json(e->episode->answer) : json(nullptr)}});
  }
  return out;
}

json Gateway::backends_json() const {
  json out = json::array();
  for (const auto& [name, b] : backends_) {
    auto j = agent::to_json(b->profile());
    j["default"] = name == options_.default_backend;
    out.push_back(j);
  }
  return out;
}

json Gateway::topology() const {
  const auto [specs, version] = platform_->store().specs();
  using store::Kind;
  json networks = json::array(), slices = json::array(), unattached = json::array();
  auto str = [](const json& spec, const char* k) { return spec.value(k, std::string()); };
  for (const auto& [key, spec] : specs) {
    if (key.kind == Kind::kNetwork) {
      json rics = json::array(), ans = json::array();
      for (const auto& [k2, s2] : specs) {
        if (k2.kind == Kind::kRic && str(s2, "network") == key.name) rics.push_back({{"name", k2.name}, {"type", s2.value("type", json())}});
        if (k2.kind != Kind::kAccessNetwork || str(s2, "network") != key.name) continue;
        json terms = json::array();
        for (const auto& [k3, s3] : specs)
          if (k3.kind == Kind::kTerminal && s3.contains("access_network") && s3["access_network"] == k2.name)
            terms.push_back(k3.name);
        ans.push_back({{"name", k2.name},
                       {"status", s2.value("status", json())},
                       {"cell_capacity_mbps", s2.value("cell_capacity_mbps", json())},
                       {"cells", s2.value("cells", json::array())},
                       {"terminals", terms}});
      }
      networks.push_back({{"name", key.name}, {"core_present", spec.value("core_present", false)}, {"rics", rics},
                          {"access_networks", ans}});
    } else if (key.kind == Kind::kTerminal && !(spec.contains("access_network") && spec["access_network"].is_string())) {
      unattached.push_back(key.name);
    } else if (key.kind == Kind::kSlice) {
      json row = {{"name", key.name}, {"access_network", spec.value("access_network", json())},
                  {"members", spec.value("members", json::array())}, {"guaranteed_mbps", nullptr}, {"max_mbps", nullptr}};
      for (const auto& [k2, s2] : specs)
        if (k2.kind == Kind::kPolicyJob && str(s2, "slice") == key.name) {
          row["guaranteed_mbps"] = s2.value("guaranteed_mbps", json());
          row["max_mbps"] = s2.value("max_mbps", json());
        }
      slices.push_back(row);
    }
  }
  return {{"version", version}, {"networks", networks}, {"unattached_terminals", unattached}, {"slices", slices}};
}

int Gateway::start(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  bind(*server_);
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kUsage, "cannot bind " + host + ":" + std::to_string(port));
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Gateway::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace ranagent::gateway
