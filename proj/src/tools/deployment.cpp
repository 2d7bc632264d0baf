#include <algorithm>
#include <set>

#include "ranagent/common/error.hpp"
#include "ranagent/tools/registry.hpp"

namespace ranagent::tools {

using store::Kind;
using store::Resource;

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::kNotFound: return "not-found";
    case Reason::kAlreadyExists: return "already-exists";
    case Reason::kInvalidArgument: return "invalid-argument";
    case Reason::kDependency: return "dependency";
    case Reason::kAdmission: return "admission";
    case Reason::kToolNotFound: return "tool-not-found";
    case Reason::kConflict: return "conflict";
  }
  return "invalid-argument";
}

Reason reason_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kIntegrity: return Reason::kNotFound;
    case ErrorCode::kAlreadyExists: return Reason::kAlreadyExists;
    case ErrorCode::kDependency: return Reason::kDependency;
    case ErrorCode::kAdmission: return Reason::kAdmission;
    case ErrorCode::kToolNotFound: return Reason::kToolNotFound;
    default: return Reason::kInvalidArgument;
  }
}

json to_json(const WriteOp& op) {
  json out = {{"op", op.spec ? "upsert" : "remove"}, {"kind", store::to_string(op.kind)}, {"name", op.name}};
  if (op.spec) out["spec"] = *op.spec;
  return out;
}

json to_json(const ToolAction& a) {
  json reasons = json::array();
  for (const auto& r : a.reasons) {
    json row = {{"reason", to_string(r.reason)}, {"message", r.message}};
    if (!r.parameter.empty()) row["parameter"] = r.parameter;
    reasons.push_back(row);
  }
  json out = {{"id", a.id},
              {"tool", a.tool},
              {"arguments", a.arguments},
              {"preflight", {{"passed", a.preflight_passed}, {"reasons", reasons}}},
              {"started_at_ms", a.started_at_ms},
              {"duration_ms", to_millis(a.duration)}};
  if (a.executed) {
    json deltas = json::array(), versions = json::array(), inverse = json::array();
    for (const auto& d : a.deltas) {
      deltas.push_back(store::to_json(d));
      versions.push_back(d.version);
    }
    for (const auto& op : a.inverse) inverse.push_back(to_json(op));
    out["result"] = {{"success", a.success}, {"deltas", deltas}, {"versions", versions}};
    if (!a.error.empty()) out["result"]["error"] = a.error;
    out["rollback"] = {{"applied", a.rolled_back}, {"inverse", inverse}};
  } else {
    out["result"] = nullptr;
  }
  return out;
}

namespace {

StoreReader reader_of(const store::WriteSession& s) {
  return {[&s](Kind k, const std::string& n) { return s.find(k, n); }, [&s](Kind k) { return s.list(k); }};
}

std::string str_field(const json& spec, const char* key) {
  auto it = spec.find(key);
  return it != spec.end() && it->is_string() ? it->get<std::string>() : std::string();
}

Resource require(const StoreReader& r, Kind kind, const std::string& name) {
  auto found = r.find(kind, name);
  if (!found) throw Error(ErrorCode::kNotFound, std::string(store::to_string(kind)) + " '" + name + "' does not exist");
  return *found;
}

void require_absent(const StoreReader& r, Kind kind, const std::string& name) {
  if (r.find(kind, name))
    throw Error(ErrorCode::kAlreadyExists, std::string(store::to_string(kind)) + " '" + name + "' already exists");
}

/// "parthenon" or "parthenon.agora" -> access network name.
std::string resolve_access(const StoreReader& r, const std::string& ref) {
  const auto dot = ref.find('.');
  const std::string an = ref.substr(0, dot);
  const auto res = require(r, Kind::kAccessNetwork, an);
  if (dot != std::string::npos) {
    const std::string net = ref.substr(dot + 1);
    if (str_field(res.spec, "network") != net)
      throw Error(ErrorCode::kNotFound, "AccessNetwork '" + an + "' is not part of network '" + net + "'");
  }
  return an;
}

json default_access_spec(const std::string& name, const std::string& network, double capacity,
                         std::int64_t prb) {
  return {{"network", network},
          {"cell_capacity_mbps", capacity},
          {"status", "up"},
          {"cells", json::array({{{"cell_id", name + "-cell1"}, {"prb_total", prb}}})}};
}

std::string next_ric_name(const StoreReader& r, const std::string& network, const std::set<std::string>& taken) {
  for (int i = 1;; ++i) {
    auto candidate = network + "-ric-" + std::to_string(i);
    if (!taken.count(candidate) && !r.find(Kind::kRic, candidate)) return candidate;
  }
}

}  // namespace

std::vector<WriteOp> ToolRegistry::plan(const std::string& name, const Args& args, const StoreReader& r) const {
  std::vector<WriteOp> ops;
  if (name == "create_network") {
    const auto net = args.str("name");
    require_absent(r, Kind::kNetwork, net);
    const auto ans = args.strings("access_networks");
    const auto rics = args.integer_or("rics", 0);
    if (rics < 0) throw Error(ErrorCode::kArgument, "rics: must be >= 0");
    const double capacity = args.number_or("cell_capacity_mbps", 100);
    ops.push_back({Kind::kNetwork, net, json{{"core_present", args.boolean_or("core_present", true)}}});
    std::set<std::string> seen;
    for (const auto& an : ans) {
      if (!seen.insert(an).second) throw Error(ErrorCode::kArgument, "access_networks: duplicate '" + an + "'");
      require_absent(r, Kind::kAccessNetwork, an);
      ops.push_back({Kind::kAccessNetwork, an, default_access_spec(an, net, capacity, 106)});
    }
    std::set<std::string> taken;
    for (std::int64_t i = 0; i < rics; ++i) {
      auto ric = next_ric_name(r, net, taken);
      taken.insert(ric);
      ops.push_back({Kind::kRic, ric, json{{"network", net}, {"type", "near-rt"}}});
    }
  } else if (name == "create_access_network") {
    const auto an = args.str("name");
    const auto net = args.str("network");
    require(r, Kind::kNetwork, net);
    require_absent(r, Kind::kAccessNetwork, an);
    ops.push_back({Kind::kAccessNetwork, an,
                   default_access_spec(an, net, args.number_or("cell_capacity_mbps", 100), args.integer_or("prb_total", 106))});
  } else if (name == "create_ric") {
    const auto net = args.str("network");
    require(r, Kind::kNetwork, net);
    std::string ric;
    if (args.has("name")) {
      ric = args.str("name");
      require_absent(r, Kind::kRic, ric);
    } else {
      ric = next_ric_name(r, net, {});
    }
    ops.push_back({Kind::kRic, ric, json{{"network", net}, {"type", args.str_or("type", "near-rt")}}});
  } else if (name == "create_terminal") {
    const auto t = args.str("name");
    require_absent(r, Kind::kTerminal, t);
    json spec = {{"profile", args.str_or("profile", "embb")},
                 {"offered_load_mbps", args.number_or("offered_load_mbps", 10)}};
    spec["access_network"] = args.has("access_network") ? json(resolve_access(r, args.str("access_network"))) : json(nullptr);
    ops.push_back({Kind::kTerminal, t, spec});
  } else if (name == "connect_terminal") {
    auto t = require(r, Kind::kTerminal, args.str("name"));
    t.spec["access_network"] = resolve_access(r, args.str("access_network"));
    ops.push_back({Kind::kTerminal, t.name, std::optional<json>(std::in_place, t.spec)});
  } else if (name == "delete_terminal") {
    const auto t = require(r, Kind::kTerminal, args.str("name"));
    for (auto s : r.list(Kind::kSlice)) {
      auto members = s.spec.value("members", json::array());
      auto it = std::find(members.begin(), members.end(), json(t.name));
      if (it == members.end()) continue;
      members.erase(it);
      s.spec["members"] = members;
      ops.push_back({Kind::kSlice, s.name, s.spec});
    }
    ops.push_back({Kind::kTerminal, t.name, std::nullopt});
  } else if (name == "delete_network") {
    const auto net = require(r, Kind::kNetwork, args.str("name"));
    std::set<std::string> ans, slices;
    for (const auto& a : r.list(Kind::kAccessNetwork))
      if (str_field(a.spec, "network") == net.name) ans.insert(a.name);
    for (const auto& s : r.list(Kind::kSlice))
      if (ans.count(str_field(s.spec, "access_network"))) slices.insert(s.name);
    for (const auto& p : r.list(Kind::kPolicyJob))
      if (slices.count(str_field(p.spec, "slice"))) ops.push_back({Kind::kPolicyJob, p.name, std::nullopt});
    for (const auto& s : slices) ops.push_back({Kind::kSlice, s, std::nullopt});
    for (const auto& ric : r.list(Kind::kRic))
      if (str_field(ric.spec, "network") == net.name) ops.push_back({Kind::kRic, ric.name, std::nullopt});
    for (const auto& a : ans) ops.push_back({Kind::kAccessNetwork, a, std::nullopt});
    ops.push_back({Kind::kNetwork, net.name, std::nullopt});
  } else if (name == "create_slice") {
    const auto slice = args.str("name");
    require_absent(r, Kind::kSlice, slice);
    require_absent(r, Kind::kPolicyJob, slice);
    const auto an = resolve_access(r, args.str("access_network"));
    json members = json::array();
    for (const auto& m : args.strings("members")) members.push_back(m);
    ops.push_back({Kind::kSlice, slice, json{{"access_network", an}, {"members", members}}});
    ops.push_back({Kind::kPolicyJob, slice,
                   json{{"slice", slice}, {"guaranteed_mbps", args.number("guaranteed_mbps")}, {"max_mbps", args.number("max_mbps")}}});
  } else if (name == "update_slice_policy") {
    const auto target = args.str("name");
    if (!args.has("guaranteed_mbps") && !args.has("max_mbps"))
      throw Error(ErrorCode::kArgument, "max_mbps: one of guaranteed_mbps or max_mbps is required");
    std::optional<Resource> job = r.find(Kind::kPolicyJob, target);
    if (!job)
      for (const auto& p : r.list(Kind::kPolicyJob))
        if (str_field(p.spec, "slice") == target) job = p;
    if (!job) throw Error(ErrorCode::kNotFound, "no PolicyJob for slice '" + target + "'");
    if (args.has("guaranteed_mbps")) job->spec["guaranteed_mbps"] = args.number("guaranteed_mbps");
    if (args.has("max_mbps")) job->spec["max_mbps"] = args.number("max_mbps");
    ops.push_back({Kind::kPolicyJob, job->name, job->spec});
  } else if (name == "delete_slice") {
    const auto slice = require(r, Kind::kSlice, args.str("name"));
    for (const auto& p : r.list(Kind::kPolicyJob))
      if (str_field(p.spec, "slice") == slice.name) ops.push_back({Kind::kPolicyJob, p.name, std::nullopt});
    ops.push_back({Kind::kSlice, slice.name, std::nullopt});
  }
  return ops;
}

namespace {

PreflightReason reason_from(const Error& e) {
  PreflightReason r{reason_for(e.code()), e.what(), {}};
  if (e.code() == ErrorCode::kArgument) {
    const std::string msg = e.what();
    r.parameter = msg.substr(0, msg.find(':'));
  }
  return r;
}

void apply(store::WriteSession& s, const WriteOp& op) {
  if (op.spec)
    s.upsert(op.kind, op.name, *op.spec);
  else
    s.remove(op.kind, op.name);
}

}  // namespace

ToolRegistry::ToolRegistry(store::ResourceStore& store, const netsim::Simulator* sim, const LogBuffer* logs)
    : store_(store), sim_(sim), logs_(logs) {}

json ToolRegistry::catalog() const {
  json tools = json::array();
  for (const auto& s : list_tools()) tools.push_back(to_json(s));
  return {{"schema_version", kToolSchemaVersion}, {"tools", tools}};
}

std::vector<PreflightReason> ToolRegistry::preflight(const std::string& name, const json& raw) const {
  const ToolSchema* schema = find_schema(name);
  if (!schema || schema->kind != ToolKind::kDeployment)
    return {{Reason::kToolNotFound, "no deployment tool named '" + name + "'", {}}};
  try {
    const Args args(*schema, raw);
    store::ResourceStore shadow;
    shadow.import_snapshot(store_.export_snapshot());
    shadow.transact([&](store::WriteSession& s) {
      for (const auto& op : plan(name, args, reader_of(s))) apply(s, op);
    });
  } catch (const Error& e) {
    return {reason_from(e)};
  } catch (const json::exception& e) {
    return {{Reason::kInvalidArgument, e.what(), {}}};
  }
  return {};
}

std::vector<std::size_t> ToolRegistry::lock_stripes(const json& args) const {
  std::set<std::size_t> out;
  auto add = [&](const json& v) {
    if (!v.is_string()) return;
    auto s = v.get<std::string>();
    out.insert(fnv1a(s.substr(0, s.find('.'))) % stripes_.size());
  };
  if (args.is_object())
    for (const auto& [_, v] : args.items()) {
      add(v);
      if (v.is_array())
        for (const auto& x : v) add(x);
    }
  return {out.begin(), out.end()};
}

void ToolRegistry::set_write_hook(std::function<void(std::size_t)> hook) { write_hook_ = std::move(hook); }

void ToolRegistry::set_audit_sink(std::function<void(const json&)> sink) {
  std::lock_guard lock(audit_mu_);
  audit_sink_ = std::move(sink);
}

ToolAction ToolRegistry::call_deployment(const std::string& name, const json& raw) {
  Stopwatch watch;
  ToolAction action;
  action.tool = name;
  action.arguments = raw.is_null() ? json::object() : raw;
  action.started_at_ms = utc_now_ms();

  // Same-name actions are serialised from preflight through execution.
  std::vector<std::unique_lock<std::mutex>> held;
  for (auto i : lock_stripes(raw)) held.emplace_back(stripes_[i]);

  action.reasons = preflight(name, raw);
  action.preflight_passed = action.reasons.empty();
  if (action.preflight_passed) {
    const ToolSchema* schema = find_schema(name);
    const Args args(*schema, raw);
    action.executed = true;
    action.exec_started = SteadyClock::now();
    store_.transact([&](store::WriteSession& s) {
      std::vector<WriteOp> ops;
      try {
        ops = plan(name, args, reader_of(s));
        for (std::size_t i = 0; i < ops.size(); ++i) {
          if (write_hook_) write_hook_(i);
          const auto before = s.find(ops[i].kind, ops[i].name);
          const auto n = s.deltas().size();
          apply(s, ops[i]);
          if (s.deltas().size() == n) continue;
          action.inverse.push_back(before ? WriteOp{ops[i].kind, ops[i].name, std::optional<json>(std::in_place, before->spec)}
                                          : WriteOp{ops[i].kind, ops[i].name, std::nullopt});
        }
        action.success = true;
      } catch (const std::exception& e) {
        action.error = e.what();
        for (auto it = action.inverse.rbegin(); it != action.inverse.rend(); ++it) apply(s, *it);
        action.rolled_back = true;
      }
      action.deltas = s.deltas();
    });
  }
  held.clear();
  action.duration = watch.elapsed();

  std::function<void(const json&)> sink;
  {
    std::lock_guard lock(audit_mu_);
    action.id = next_id_++;
    audit_.push_back(action);
    sink = audit_sink_;
  }
  if (sink) sink(to_json(action));
  return action;
}

std::vector<store::Delta> ToolRegistry::revert(const ToolAction& action) {
  std::vector<store::Delta> out;
  if (!action.success) return out;
  store_.transact([&](store::WriteSession& s) {
    for (auto it = action.inverse.rbegin(); it != action.inverse.rend(); ++it) apply(s, *it);
    out = s.deltas();
  });
  return out;
}

std::vector<ToolAction> ToolRegistry::audit() const {
  std::lock_guard lock(audit_mu_);
  return audit_;
}

void ToolRegistry::write_audit_ndjson(std::ostream& out) const {
  for (const auto& a : audit()) out << to_json(a).dump() << '\n';
}

}  // namespace ranagent::tools
