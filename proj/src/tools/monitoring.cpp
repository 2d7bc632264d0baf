#include <algorithm>

#include "ranagent/common/error.hpp"
#include "ranagent/tools/registry.hpp"

namespace ranagent::tools {

using store::Kind;
using store::Resource;

namespace {

std::string str_field(const json& spec, const char* key) {
  auto it = spec.find(key);
  return it != spec.end() && it->is_string() ? it->get<std::string>() : std::string();
}

json kpi_row(const netsim::KpiSample& s) {
  return {{"tick", s.timestamp},
          {"throughput_mbps", s.throughput_mbps},
          {"latency_ms", s.latency_ms},
          {"prb_used", s.prb_used}};
}

int status_rank(const std::string& s) { return s == "down" ? 2 : s == "degraded" ? 1 : 0; }

}  // namespace

json ToolRegistry::call_monitoring(const std::string& name, const json& raw) const {
  const ToolSchema* schema = find_schema(name);
  if (!schema || schema->kind != ToolKind::kMonitoring)
    throw Error(ErrorCode::kToolNotFound, "no monitoring tool named '" + name + "'");
  const Args args(*schema, raw);
  json data;

  if (name == "list_networks") {
    data = json::array();
    const auto ans = store_.list(Kind::kAccessNetwork);
    const auto rics = store_.list(Kind::kRic);
    for (const auto& n : store_.list(Kind::kNetwork)) {
      json an_names = json::array(), ric_names = json::array();
      for (const auto& a : ans)
        if (str_field(a.spec, "network") == n.name) an_names.push_back(a.name);
      for (const auto& r : rics)
        if (str_field(r.spec, "network") == n.name) ric_names.push_back(r.name);
      data.push_back({{"name", n.name},
                      {"core_present", n.spec.value("core_present", false)},
                      {"access_networks", an_names},
                      {"rics", ric_names}});
    }
  } else if (name == "get_network_status") {
    const auto target = args.str("name");
    if (auto an = store_.find(Kind::kAccessNetwork, target)) {
      const auto status = an->spec.value("status", std::string("up"));
      json cells = json::array(), terminals = json::array();
      for (const auto& c : an->spec.value("cells", json::array()))
        cells.push_back({{"cell_id", c.at("cell_id")}, {"prb_total", c.at("prb_total")}});
      for (const auto& t : store_.list(Kind::kTerminal))
        if (str_field(t.spec, "access_network") == target) terminals.push_back(t.name);
      data = {{"name", target},
              {"kind", "AccessNetwork"},
              {"network", str_field(an->spec, "network")},
              {"status", status},
              {"working", status == "up"},
              {"cell_capacity_mbps", an->spec.at("cell_capacity_mbps")},
              {"cells", cells},
              {"terminals", terminals}};
    } else if (auto net = store_.find(Kind::kNetwork, target)) {
      json ans = json::array(), rics = json::array();
      std::string worst = "up";
      for (const auto& a : store_.list(Kind::kAccessNetwork)) {
        if (str_field(a.spec, "network") != target) continue;
        const auto s = a.spec.value("status", std::string("up"));
        if (status_rank(s) > status_rank(worst)) worst = s;
        ans.push_back({{"name", a.name}, {"status", s}});
      }
      for (const auto& r : store_.list(Kind::kRic))
        if (str_field(r.spec, "network") == target) rics.push_back(r.name);
      data = {{"name", target},
              {"kind", "Network"},
              {"core_present", net->spec.value("core_present", false)},
              {"status", worst},
              {"working", worst == "up"},
              {"access_networks", ans},
              {"rics", rics}};
    } else {
      throw Error(ErrorCode::kNotFound, "no network or access network named '" + target + "'");
    }
  } else if (name == "list_terminals") {
    data = json::array();
    std::map<std::string, std::string> an_network;
    for (const auto& a : store_.list(Kind::kAccessNetwork)) an_network[a.name] = str_field(a.spec, "network");
    const auto slices = store_.list(Kind::kSlice);
    for (const auto& t : store_.list(Kind::kTerminal)) {
      const auto an = str_field(t.spec, "access_network");
      if (args.has("name") && t.name != args.str("name")) continue;
      if (args.has("access_network") && an != args.str("access_network")) continue;
      if (args.has("profile") && str_field(t.spec, "profile") != args.str("profile")) continue;
      json member_of = json::array();
      for (const auto& s : slices)
        for (const auto& m : s.spec.value("members", json::array()))
          if (m == t.name) member_of.push_back(s.name);
      data.push_back({{"name", t.name},
                      {"access_network", an.empty() ? json(nullptr) : json(an)},
                      {"network", an.empty() ? json(nullptr) : json(an_network[an])},
                      {"attached", !an.empty()},
                      {"profile", str_field(t.spec, "profile")},
                      {"offered_load_mbps", t.spec.at("offered_load_mbps")},
                      {"slices", member_of}});
    }
  } else if (name == "list_slices") {
    data = json::array();
    for (const auto& s : store_.list(Kind::kSlice)) {
      if (args.has("name") && s.name != args.str("name")) continue;
      if (args.has("access_network") && str_field(s.spec, "access_network") != args.str("access_network")) continue;
      json row = {{"name", s.name},
                  {"access_network", str_field(s.spec, "access_network")},
                  {"members", s.spec.value("members", json::array())},
                  {"guaranteed_mbps", nullptr},
                  {"max_mbps", nullptr}};
      for (const auto& p : store_.list(Kind::kPolicyJob))
        if (str_field(p.spec, "slice") == s.name) {
          row["guaranteed_mbps"] = p.spec.at("guaranteed_mbps");
          row["max_mbps"] = p.spec.at("max_mbps");
          row["policyjob"] = p.name;
        }
      data.push_back(row);
    }
  } else if (name == "get_policyjob") {
    auto render = [](const Resource& p) {
      return json{{"name", p.name},
                  {"slice", str_field(p.spec, "slice")},
                  {"guaranteed_mbps", p.spec.at("guaranteed_mbps")},
                  {"max_mbps", p.spec.at("max_mbps")},
                  {"version", p.version}};
    };
    if (args.has("name")) {
      const auto target = args.str("name");
      std::optional<Resource> found = store_.find(Kind::kPolicyJob, target);
      if (!found)
        for (const auto& p : store_.list(Kind::kPolicyJob))
          if (str_field(p.spec, "slice") == target) found = p;
      if (!found) throw Error(ErrorCode::kNotFound, "no PolicyJob for slice '" + target + "'");
      data = render(*found);
    } else {
      data = json::array();
      for (const auto& p : store_.list(Kind::kPolicyJob)) data.push_back(render(p));
    }
  } else if (name == "get_kpis") {
    if (!sim_) throw Error(ErrorCode::kNotFound, "no KPI source attached");
    auto scope = args.str("scope");
    const auto window = args.integer_or("window", 10);
    if (window < 1) throw Error(ErrorCode::kArgument, "window: must be >= 1");
    if (scope.find('/') == std::string::npos) {
      if (sim_->latest("slice/" + scope))
        scope = "slice/" + scope;
      else if (sim_->latest("terminal/" + scope))
        scope = "terminal/" + scope;
    }
    const auto latest = sim_->latest(scope);
    if (!latest) throw Error(ErrorCode::kNotFound, "no KPI samples for '" + scope + "'");
    json rows = json::array();
    double sum = 0, peak = 0;
    const auto series = sim_->series(scope, latest->timestamp - window + 1, latest->timestamp);
    for (const auto& s : series) {
      rows.push_back(kpi_row(s));
      sum += s.throughput_mbps;
      peak = std::max(peak, s.throughput_mbps);
    }
    data = {{"scope", scope},
            {"access_network", latest->scope.access_network},
            {"latest", kpi_row(*latest)},
            {"mean_throughput_mbps", series.empty() ? 0.0 : sum / static_cast<double>(series.size())},
            {"peak_throughput_mbps", peak},
            {"samples", rows}};
  } else if (name == "get_logs") {
    data = json::array();
    if (logs_) {
      const auto limit = args.integer_or("limit", 20);
      if (limit < 1) throw Error(ErrorCode::kArgument, "limit: must be >= 1");
      for (const auto& e : logs_->tail(args.str_or("resource", ""), static_cast<std::size_t>(limit)))
        data.push_back(to_json(e));
    }
  }
  return {{"schema_version", kToolSchemaVersion}, {"tool", name}, {"data", data}};
}

}  // namespace ranagent::tools
