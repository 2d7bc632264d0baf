#include "ranagent/tools/schema.hpp"

#include <cmath>

#include "ranagent/common/error.hpp"

namespace ranagent::tools {

using store::Kind;

std::string_view to_string(ToolKind kind) {
  return kind == ToolKind::kMonitoring ? "monitoring" : "deployment";
}

const ToolParam* ToolSchema::param(const std::string& n) const {
  for (const auto& p : parameters)
    if (p.name == n) return &p;
  return nullptr;
}

json to_json(const ToolSchema& s) {
  json params = json::array();
  for (const auto& p : s.parameters)
    params.push_back({{"name", p.name}, {"type", p.type}, {"required", p.required}, {"description", p.description}});
  json out = {{"name", s.name}, {"kind", to_string(s.kind)}, {"description", s.description}, {"parameters", params}};
  if (s.kind == ToolKind::kDeployment) {
    json kinds = json::array();
    for (auto k : s.mutates) kinds.push_back(store::to_string(k));
    out["mutates"] = kinds;
  }
  return out;
}

const std::vector<ToolSchema>& builtin_schemas() {
  static const std::vector<ToolSchema> schemas = [] {
    const auto M = ToolKind::kMonitoring;
    const auto D = ToolKind::kDeployment;
    return std::vector<ToolSchema>{
        {"list_networks", M, "List networks with their access networks and RICs.", {}, {}},
        {"get_network_status", M, "Health of a network or access network.",
         {{"name", "string", true, "network or access network name"}}, {}},
        {"list_terminals", M, "List terminals with attachment, profile and slice membership.",
         {{"name", "string", false, "only this terminal"},
          {"access_network", "string", false, "only terminals attached here"},
          {"profile", "string", false, "embb or urllc"}},
         {}},
        {"list_slices", M, "List slices with members and throughput policy.",
         {{"name", "string", false, "only this slice"},
          {"access_network", "string", false, "only slices on this access network"}},
         {}},
        {"get_policyjob", M, "PolicyJob of a slice; all PolicyJobs when no name is given.",
         {{"name", "string", false, "slice name"}}, {}},
        {"get_kpis", M, "Recent KPI samples for a slice or terminal.",
         {{"scope", "string", true, "slice or terminal name, or slice/<name>, terminal/<name>"},
          {"window", "integer", false, "number of most recent ticks (default 10)"}},
         {}},
        {"get_logs", M, "Recent platform log lines, optionally for one resource.",
         {{"resource", "string", false, "resource name or Kind/name"},
          {"limit", "integer", false, "maximum lines (default 20)"}},
         {}},
        {"create_network", D, "Deploy a network blueprint with access networks and RICs.",
         {{"name", "string", true, "network name"},
          {"access_networks", "string[]", false, "access network names to create"},
          {"rics", "integer", false, "number of near-RT RICs (default 0)"},
          {"cell_capacity_mbps", "number", false, "capacity of each access network (default 100)"},
          {"core_present", "boolean", false, "whether a core is deployed (default true)"}},
         {Kind::kNetwork, Kind::kAccessNetwork, Kind::kRic}},
        {"create_access_network", D, "Add an access network to an existing network.",
         {{"name", "string", true, "access network name"},
          {"network", "string", true, "parent network"},
          {"cell_capacity_mbps", "number", false, "capacity in Mbps (default 100)"},
          {"prb_total", "integer", false, "PRBs of its cell (default 106)"}},
         {Kind::kAccessNetwork}},
        {"create_ric", D, "Add a RIC to an existing network.",
         {{"network", "string", true, "parent network"},
          {"name", "string", false, "RIC name (default <network>-ric-<n>)"},
          {"type", "string", false, "near-rt or non-rt (default near-rt)"}},
         {Kind::kRic}},
        {"create_terminal", D, "Register a terminal, optionally attached to an access network.",
         {{"name", "string", true, "terminal name"},
          {"profile", "string", false, "embb or urllc (default embb)"},
          {"offered_load_mbps", "number", false, "offered load (default 10)"},
          {"access_network", "string", false, "access network, or <access>.<network>"}},
         {Kind::kTerminal}},
        {"connect_terminal", D, "Attach a terminal to an access network.",
         {{"name", "string", true, "terminal name"},
          {"access_network", "string", true, "access network, or <access>.<network>"}},
         {Kind::kTerminal}},
        {"delete_terminal", D, "Remove a terminal and its slice memberships.",
         {{"name", "string", true, "terminal name"}}, {Kind::kTerminal, Kind::kSlice}},
        {"delete_network", D, "Delete a network blueprint with its RICs, access networks and slices.",
         {{"name", "string", true, "network name"}},
         {Kind::kNetwork, Kind::kAccessNetwork, Kind::kRic, Kind::kSlice, Kind::kPolicyJob}},
        {"create_slice", D, "Create a slice and its throughput PolicyJob.",
         {{"name", "string", true, "slice name"},
          {"access_network", "string", true, "access network"},
          {"guaranteed_mbps", "number", true, "guaranteed throughput"},
          {"max_mbps", "number", true, "maximum throughput"},
          {"members", "string[]", false, "member terminals"}},
         {Kind::kSlice, Kind::kPolicyJob}},
        {"update_slice_policy", D, "Change the guaranteed and/or maximum throughput of a slice.",
         {{"name", "string", true, "slice name"},
          {"guaranteed_mbps", "number", false, "new guaranteed throughput"},
          {"max_mbps", "number", false, "new maximum throughput"}},
         {Kind::kPolicyJob}},
        {"delete_slice", D, "Delete a slice and its PolicyJob.",
         {{"name", "string", true, "slice name"}}, {Kind::kSlice, Kind::kPolicyJob}},
    };
  }();
  return schemas;
}

const ToolSchema* find_schema(const std::string& name) {
  for (const auto& s : builtin_schemas())
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

bool type_ok(const std::string& type, const json& v) {
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "string[]") {
    if (!v.is_array()) return false;
    for (const auto& x : v)
      if (!x.is_string()) return false;
    return true;
  }
  return false;
}

}  // namespace

Args::Args(const ToolSchema& schema, const json& args) {
  if (args.is_null()) {
    args_ = json::object();
  } else if (!args.is_object()) {
    throw Error(ErrorCode::kArgument, "arguments: expected an object");
  } else {
    args_ = args;
  }
  for (const auto& [key, value] : args_.items()) {
    const auto* p = schema.param(key);
    if (!p) throw Error(ErrorCode::kArgument, key + ": not a parameter of " + schema.name);
    if (value.is_null()) continue;
    if (!type_ok(p->type, value)) throw Error(ErrorCode::kArgument, key + ": expected " + p->type);
  }
  for (const auto& p : schema.parameters)
    if (p.required && !has(p.name)) throw Error(ErrorCode::kArgument, p.name + ": required");
}

bool Args::has(const std::string& name) const { return args_.contains(name) && !args_.at(name).is_null(); }

const json& Args::require(const std::string& name) const {
  if (!has(name)) throw Error(ErrorCode::kArgument, name + ": required");
  return args_.at(name);
}

std::string Args::str(const std::string& name) const {
  auto s = require(name).get<std::string>();
  if (s.empty()) throw Error(ErrorCode::kArgument, name + ": must not be empty");
  return s;
}

std::string Args::str_or(const std::string& name, const std::string& fallback) const {
  return has(name) ? str(name) : fallback;
}

double Args::number(const std::string& name) const { return require(name).get<double>(); }

double Args::number_or(const std::string& name, double fallback) const {
  return has(name) ? number(name) : fallback;
}

std::int64_t Args::integer_or(const std::string& name, std::int64_t fallback) const {
  return has(name) ? static_cast<std::int64_t>(require(name).get<double>()) : fallback;
}

bool Args::boolean_or(const std::string& name, bool fallback) const {
  return has(name) ? require(name).get<bool>() : fallback;
}

std::vector<std::string> Args::strings(const std::string& name) const {
  if (!has(name)) return {};
  return require(name).get<std::vector<std::string>>();
}

}  // namespace ranagent::tools
