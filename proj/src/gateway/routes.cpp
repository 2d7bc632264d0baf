#include <httplib.h>

#include <sstream>

#include "ranagent/common/error.hpp"
#include "ranagent/gateway/gateway.hpp"

namespace ranagent::gateway {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kArgument:
    case ErrorCode::kUnknownKind:
    case ErrorCode::kUsage: return 400;
    case ErrorCode::kNotFound:
    case ErrorCode::kToolNotFound: return 404;
    case ErrorCode::kAlreadyExists:
    case ErrorCode::kDependency:
    case ErrorCode::kAdmission: return 409;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", {{"code", to_string(code)}, {"message", message}}}}, status_for(code));
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps Error and parse failures to JSON error bodies.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::kValidation, e.what());
    }
  };
}

std::optional<std::int64_t> int_param(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) return std::nullopt;
  const auto v = req.get_param_value(name);
  std::size_t used = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(ErrorCode::kValidation, name + ": expected an integer");
  return out;
}

std::string format_of(const httplib::Request& req, const std::string& fallback,
                      std::initializer_list<const char*> allowed) {
  const auto f = req.has_param("format") ? req.get_param_value("format") : fallback;
  for (const char* a : allowed)
    if (f == a) return f;
  throw Error(ErrorCode::kValidation, "format: unsupported '" + f + "'");
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string sse_frame(const json& event) {
  return "id: " + std::to_string(event["seq"].get<std::int64_t>()) + "\nevent: " + event.value("type", std::string("message")) +
         "\ndata: " + event.dump() + "\n\n";
}

}  // namespace

void Gateway::bind(httplib::Server& server) {
  server.Get("/healthz", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"},
                    {"store_version", platform_->store().version()},
                    {"tick", platform_->sim().snapshot()->tick},
                    {"answers", answers_->size()}});
  }));

  server.Post("/v1/intents", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) throw Error(ErrorCode::kValidation, "body is not valid JSON");
    const auto id = submit(intent_from_json(body));
    send_json(res,
              {{"episode_id", id},
               {"status", "queued"},
               {"links", {{"self", "/v1/episodes/" + id}, {"events", "/v1/episodes/" + id + "/events"}}}},
              202);
  }));

  server.Get("/v1/episodes", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"episodes", list_episodes()}});
  }));

  server.Get(R"(/v1/episodes/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto e = episode_json(req.matches[1]);
    if (!e) throw Error(ErrorCode::kNotFound, "no episode " + std::string(req.matches[1]));
    send_json(res, *e);
  }));

  server.Get(R"(/v1/episodes/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto channel = events(req.matches[1]);
    if (!channel) throw Error(ErrorCode::kNotFound, "no episode " + std::string(req.matches[1]));
    std::int64_t after = 0;
    if (req.has_header("Last-Event-ID")) {
      try {
        after = std::stoll(req.get_header_value("Last-Event-ID"));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kValidation, "Last-Event-ID: expected an integer");
      }
    }
    if (auto a = int_param(req, "after")) after = *a;
    if (after < 0) throw Error(ErrorCode::kValidation, "after: must be >= 0");
    auto cursor = std::make_shared<std::int64_t>(after);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [channel, cursor](std::size_t, httplib::DataSink& sink) {
      bool closed = false;
      const auto batch = channel->read_after(*cursor, std::chrono::milliseconds(500), closed);
      for (const auto& ev : batch) {
        const auto frame = sse_frame(ev);
        if (!sink.write(frame.data(), frame.size())) return false;
        *cursor = ev["seq"].get<std::int64_t>();
      }
      if (closed && batch.empty()) {
        sink.done();
      } else if (batch.empty()) {
        static const std::string keepalive = ": keep-alive\n\n";
        if (!sink.write(keepalive.data(), keepalive.size())) return false;
      }
      return true;
    });
  }));

  server.Get("/v1/backends", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"backends", backends_json()}});
  }));

  server.Get("/v1/tools", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, platform_->tools().catalog());
  }));

  server.Get("/v1/resources", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (req.has_param("name") && !req.has_param("kind")) throw Error(ErrorCode::kValidation, "name: requires kind");
    std::optional<store::Kind> kind;
    if (req.has_param("kind")) kind = store::parse_kind(req.get_param_value("kind"));
    const auto version = platform_->store().version();
    json items = json::array();
    if (req.has_param("name")) {
      const auto name = req.get_param_value("name");
      auto r = platform_->store().find(*kind, name);
      if (!r) throw Error(ErrorCode::kNotFound, "no " + std::string(store::to_string(*kind)) + "/" + name);
      items.push_back(store::to_json(*r));
    } else {
      for (const auto& r : kind ? platform_->store().list(*kind) : platform_->store().list_all())
        items.push_back(store::to_json(r));
    }
    send_json(res, {{"version", version}, {"items", items}});
  }));

  server.Get("/v1/kpis", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto fmt = format_of(req, "json", {"json", "ndjson", "csv"});
    if (!req.has_param("scope")) {
      send_json(res, {{"scopes", platform_->sim().scope_keys()}, {"tick", platform_->sim().snapshot()->tick}});
      return;
    }
    const auto scope = req.get_param_value("scope");
    const auto latest = platform_->sim().latest(scope);
    if (!latest) throw Error(ErrorCode::kNotFound, "no KPI samples for scope '" + scope + "'");
    const auto to = int_param(req, "to").value_or(latest->timestamp);
    const auto from = int_param(req, "from").value_or(std::max<std::int64_t>(0, to - 59));
    if (from > to) throw Error(ErrorCode::kValidation, "from: must not exceed to");
    const auto samples = platform_->sim().series(scope, from, to);
    if (fmt == "csv") {
      std::string out = "timestamp,scope,throughput_mbps,latency_ms,prb_used\n";
      for (const auto& s : samples) {
        const auto j = netsim::to_json(s);
        out += std::to_string(s.timestamp) + "," + csv_cell(scope) + "," + j["throughput_mbps"].dump() + "," +
               j["latency_ms"].dump() + "," + std::to_string(s.prb_used) + "\n";
      }
      res.set_content(out, "text/csv");
    } else if (fmt == "ndjson") {
      std::ostringstream out;
      netsim::write_kpi_ndjson(out, samples);
      res.set_content(out.str(), "application/x-ndjson");
    } else {
      json rows = json::array();
      for (const auto& s : samples) rows.push_back(netsim::to_json(s));
      send_json(res, {{"scope", scope}, {"from", from}, {"to", to}, {"samples", rows}});
    }
  }));

  server.Get("/v1/answers", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto fmt = format_of(req, "json", {"json", "ndjson", "csv"});
    const auto from = int_param(req, "from").value_or(0);
    const auto to = int_param(req, "to").value_or(std::numeric_limits<std::int64_t>::max());
    if (from > to) throw Error(ErrorCode::kValidation, "from: must not exceed to");
    const auto records = answers_->range(from, to);
    if (fmt == "csv") {
      std::string out = "id,ts_ms,episode_id,backend,branch,steps,e2e_latency_ms,failed,prompt,answer\n";
      for (const auto& r : records) {
        out += r.id + "," + std::to_string(r.ts_ms) + "," + csv_cell(r.episode_id) + "," + csv_cell(r.backend) + "," +
               r.branch + "," + std::to_string(r.steps) + "," + json(r.e2e_latency_ms).dump() + "," +
               (r.failed ? "true" : "false") + "," + csv_cell(r.prompt) + "," + csv_cell(r.answer) + "\n";
      }
      res.set_content(out, "text/csv");
    } else if (fmt == "ndjson") {
      std::string out;
      for (const auto& r : records) out += agent::to_json(r).dump() + "\n";
      res.set_content(out, "application/x-ndjson");
    } else {
      json rows = json::array();
      for (const auto& r : records) rows.push_back(agent::to_json(r));
      send_json(res, {{"records", rows}});
    }
  }));

  server.Get("/v1/audit", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto fmt = format_of(req, "ndjson", {"json", "ndjson"});
    if (fmt == "ndjson") {
      std::ostringstream out;
      platform_->tools().write_audit_ndjson(out);
      res.set_content(out.str(), "application/x-ndjson");
    } else {
      json rows = json::array();
      for (const auto& a : platform_->tools().audit()) rows.push_back(tools::to_json(a));
      send_json(res, {{"actions", rows}});
    }
  }));

  server.Get("/v1/topology", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, topology());
  }));
}

}  // namespace ranagent::gateway
