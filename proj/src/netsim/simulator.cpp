#include "ranagent/netsim/simulator.hpp"

#include <fstream>

#include "ranagent/common/error.hpp"

namespace ranagent::netsim {

namespace {

template <typename T>
T required(const json& doc, const char* key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorCode::kValidation, where + "." + key + ": required");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kValidation, where + "." + key + ": wrong type");
  }
}

}  // namespace

SimState load_scenario(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kValidation, "scenario: expected an object");
  SimState s;
  s.seed = doc.value("seed", std::uint64_t{0});
  s.tick = doc.value("tick", std::int64_t{0});
  for (const auto& n : doc.value("networks", json::array())) {
    SimNetwork net;
    net.name = required<std::string>(n, "name", "networks[]");
    const std::string where = "networks[" + net.name + "]";
    net.core_present = n.value("core_present", false);
    const auto& rics = n.value("rics", json(0));
    net.rics = rics.is_array() ? static_cast<int>(rics.size()) : rics.get<int>();
    for (const auto& a : n.value("access_networks", json::array())) {
      SimAccessNetwork an;
      an.name = required<std::string>(a, "name", where + ".access_networks[]");
      an.parent_network = net.name;
      an.cell_capacity_mbps = required<double>(a, "cell_capacity_mbps", "access_networks[" + an.name + "]");
      an.status = parse_status(a.value("status", "up"));
      for (const auto& c : a.value("cells", json::array())) {
        an.cells.push_back({required<std::string>(c, "cell_id", "cells[]"),
                            required<int>(c, "prb_total", "cells[]"),
                            c.value("center_frequency_mhz", 0.0)});
      }
      net.access_networks.push_back(std::move(an));
    }
    s.networks.push_back(std::move(net));
  }
  for (const auto& t : doc.value("terminals", json::array())) {
    SimTerminal term;
    term.name = required<std::string>(t, "name", "terminals[]");
    if (t.contains("attached_to") && !t["attached_to"].is_null())
      term.attached_to = t["attached_to"].get<std::string>();
    term.profile = parse_profile(t.value("profile", "embb"));
    term.offered_load_mbps = t.value("offered_load_mbps", 0.0);
    s.terminals.push_back(std::move(term));
  }
  for (const auto& p : doc.value("slices", json::array())) {
    SlicePolicy sp;
    sp.slice_name = required<std::string>(p, "slice_name", "slices[]");
    const std::string where = "slices[" + sp.slice_name + "]";
    sp.network = required<std::string>(p, "network", where);
    sp.guaranteed_mbps = required<double>(p, "guaranteed_mbps", where);
    sp.max_mbps = required<double>(p, "max_mbps", where);
    sp.member_terminals = p.value("member_terminals", std::vector<std::string>{});
    s.slices.push_back(std::move(sp));
  }
  validate(s);
  return s;
}

SimState load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, "scenario " + path + ": " + e.what());
  }
  return load_scenario(doc);
}

json scenario_to_json(const SimState& state) {
  json doc = {{"seed", state.seed}, {"tick", state.tick}};
  doc["networks"] = json::array();
  for (const auto& n : state.networks) {
    json jn = {{"name", n.name}, {"core_present", n.core_present}, {"rics", n.rics}};
    jn["access_networks"] = json::array();
    for (const auto& a : n.access_networks) {
      json ja = {{"name", a.name},
                 {"cell_capacity_mbps", a.cell_capacity_mbps},
                 {"status", to_string(a.status)},
                 {"cells", json::array()}};
      for (const auto& c : a.cells)
        ja["cells"].push_back({{"cell_id", c.cell_id},
                               {"prb_total", c.prb_total},
                               {"center_frequency_mhz", c.center_frequency_mhz}});
      jn["access_networks"].push_back(std::move(ja));
    }
    doc["networks"].push_back(std::move(jn));
  }
  doc["terminals"] = json::array();
  for (const auto& t : state.terminals) {
    doc["terminals"].push_back({{"name", t.name},
                                {"attached_to", t.attached_to ? json(*t.attached_to) : json(nullptr)},
                                {"profile", to_string(t.profile)},
                                {"offered_load_mbps", t.offered_load_mbps}});
  }
  doc["slices"] = json::array();
  for (const auto& s : state.slices) {
    doc["slices"].push_back({{"slice_name", s.slice_name},
                             {"network", s.network},
                             {"guaranteed_mbps", s.guaranteed_mbps},
                             {"max_mbps", s.max_mbps},
                             {"member_terminals", s.member_terminals}});
  }
  return doc;
}

json to_json(const KpiSample& s) {
  return {{"timestamp", s.timestamp},
          {"network", s.scope.network},
          {"access_network", s.scope.access_network},
          {"scope", s.scope.kind == ScopeKind::kSlice ? "slice" : "terminal"},
          {"name", s.scope.name},
          {"throughput_mbps", s.throughput_mbps},
          {"latency_ms", s.latency_ms},
          {"prb_used", s.prb_used}};
}

KpiSample kpi_from_json(const json& doc) {
  KpiSample s;
  s.timestamp = doc.at("timestamp").get<std::int64_t>();
  s.scope.network = doc.at("network").get<std::string>();
  s.scope.access_network = doc.at("access_network").get<std::string>();
  s.scope.kind = doc.at("scope") == "slice" ? ScopeKind::kSlice : ScopeKind::kTerminal;
  s.scope.name = doc.at("name").get<std::string>();
  s.throughput_mbps = doc.at("throughput_mbps").get<double>();
  s.latency_ms = doc.at("latency_ms").get<double>();
  s.prb_used = doc.at("prb_used").get<int>();
  return s;
}

void write_kpi_ndjson(std::ostream& out, const std::vector<KpiSample>& samples) {
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

Simulator::Simulator(SimState initial, std::size_t history_per_scope)
    : history_per_scope_(history_per_scope) {
  validate(initial);
  current_ = std::make_shared<const SimState>(std::move(initial));
}

std::shared_ptr<const SimState> Simulator::snapshot() const {
  std::shared_lock lock(read_mu_);
  return current_;
}

void Simulator::publish(SimState next) {
  auto ptr = std::make_shared<const SimState>(std::move(next));
  std::unique_lock lock(read_mu_);
  current_ = std::move(ptr);
}

std::vector<KpiSample> Simulator::advance(std::int64_t ticks) {
  std::lock_guard writer(write_mu_);
  auto result = step(*snapshot(), ticks);
  {
    std::unique_lock lock(read_mu_);
    for (const auto& s : result.samples) {
      auto& q = history_[s.scope.key()];
      q.push_back(s);
      while (q.size() > history_per_scope_) q.pop_front();
    }
    current_ = std::make_shared<const SimState>(std::move(result.state));
  }
  return std::move(result.samples);
}

void Simulator::apply_policy(const SlicePolicy& policy) {
  std::lock_guard writer(write_mu_);
  publish(apply_slice_policy(*snapshot(), policy));
}

void Simulator::replace_state(SimState next) {
  std::lock_guard writer(write_mu_);
  const auto cur = snapshot();
  next.tick = cur->tick;
  next.seed = cur->seed;
  validate(next);
  publish(std::move(next));
}

std::vector<KpiSample> Simulator::series(const std::string& scope_key, std::int64_t from_tick,
                                         std::int64_t to_tick) const {
  std::shared_lock lock(read_mu_);
  std::vector<KpiSample> out;
  auto it = history_.find(scope_key);
  if (it == history_.end()) return out;
  for (const auto& s : it->second)
    if (s.timestamp >= from_tick && s.timestamp <= to_tick) out.push_back(s);
  return out;
}

std::optional<KpiSample> Simulator::latest(const std::string& scope_key) const {
  std::shared_lock lock(read_mu_);
  auto it = history_.find(scope_key);
  if (it == history_.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

std::vector<std::string> Simulator::scope_keys() const {
  std::shared_lock lock(read_mu_);
  std::vector<std::string> keys;
  for (const auto& [k, _] : history_) keys.push_back(k);
  return keys;
}

}  // namespace ranagent::netsim
