#include "ranagent/platform/platform.hpp"

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::platform {

using store::Kind;

void seed_store(store::ResourceStore& store, const netsim::SimState& scenario) {
  store.transact([&](store::WriteSession& s) {
    for (const auto& n : scenario.networks) {
      s.upsert(Kind::kNetwork, n.name, {{"core_present", n.core_present}});
      for (const auto& a : n.access_networks) {
        json cells = json::array();
        for (const auto& c : a.cells)
          cells.push_back({{"cell_id", c.cell_id}, {"prb_total", c.prb_total}, {"center_frequency_mhz", c.center_frequency_mhz}});
        s.upsert(Kind::kAccessNetwork, a.name,
                 {{"network", n.name},
                  {"cell_capacity_mbps", a.cell_capacity_mbps},
                  {"status", netsim::to_string(a.status)},
                  {"cells", cells}});
      }
      for (int i = 1; i <= n.rics; ++i)
        s.upsert(Kind::kRic, n.name + "-ric-" + std::to_string(i), {{"network", n.name}, {"type", "near-rt"}});
    }
    for (const auto& t : scenario.terminals)
      s.upsert(Kind::kTerminal, t.name,
               {{"access_network", t.attached_to ? json(*t.attached_to) : json(nullptr)},
                {"profile", netsim::to_string(t.profile)},
                {"offered_load_mbps", t.offered_load_mbps}});
    for (const auto& p : scenario.slices) {
      s.upsert(Kind::kSlice, p.slice_name, {{"access_network", p.network}, {"members", p.member_terminals}});
      s.upsert(Kind::kPolicyJob, p.slice_name,
               {{"slice", p.slice_name}, {"guaranteed_mbps", p.guaranteed_mbps}, {"max_mbps", p.max_mbps}});
    }
  });
}

netsim::SimState project(const store::SpecMap& specs) {
  netsim::SimState out;
  std::map<std::string, std::size_t> net_index;
  for (const auto& [key, spec] : specs) {
    if (key.kind != Kind::kNetwork) continue;
    net_index[key.name] = out.networks.size();
    out.networks.push_back({key.name, {}, 0, spec.value("core_present", false)});
  }
  for (const auto& [key, spec] : specs) {
    if (key.kind == Kind::kRic) {
      ++out.networks[net_index.at(spec.at("network").get<std::string>())].rics;
    } else if (key.kind == Kind::kAccessNetwork) {
      netsim::SimAccessNetwork a;
      a.name = key.name;
      a.parent_network = spec.at("network").get<std::string>();
      a.cell_capacity_mbps = spec.at("cell_capacity_mbps").get<double>();
      a.status = netsim::parse_status(spec.value("status", std::string("up")));
      for (const auto& c : spec.value("cells", json::array()))
        a.cells.push_back({c.at("cell_id").get<std::string>(), c.at("prb_total").get<int>(),
                           c.value("center_frequency_mhz", 0.0)});
      out.networks[net_index.at(a.parent_network)].access_networks.push_back(std::move(a));
    } else if (key.kind == Kind::kTerminal) {
      netsim::SimTerminal t;
      t.name = key.name;
      if (auto it = spec.find("access_network"); it != spec.end() && it->is_string()) t.attached_to = it->get<std::string>();
      t.profile = netsim::parse_profile(spec.at("profile").get<std::string>());
      t.offered_load_mbps = spec.at("offered_load_mbps").get<double>();
      out.terminals.push_back(std::move(t));
    }
  }
  for (const auto& [key, spec] : specs) {
    if (key.kind != Kind::kPolicyJob) continue;
    const auto slice = spec.at("slice").get<std::string>();
    auto it = specs.find({Kind::kSlice, slice});
    if (it == specs.end()) continue;
    bool taken = false;
    for (const auto& p : out.slices) taken |= p.slice_name == slice;
    if (taken) continue;
    out.slices.push_back({slice, it->second.at("access_network").get<std::string>(),
                          spec.at("guaranteed_mbps").get<double>(), spec.at("max_mbps").get<double>(),
                          it->second.value("members", std::vector<std::string>{})});
  }
  return out;
}

// ---------------------------------------------------------------- SimReconciler

SimReconciler::SimReconciler(store::ResourceStore& store, netsim::Simulator& sim, tools::LogBuffer* logs)
    : store_(store), sim_(sim), logs_(logs) {
  rebuild("initial load");
}

void SimReconciler::rebuild(const std::string& reason) {
  auto [specs, version] = store_.specs();
  mirror_ = std::move(specs);
  sub_.emplace(store_.watch({version}));
  try {
    sim_.replace_state(project(mirror_));
  } catch (const Error& e) {
    if (logs_) logs_->append("error", "", "simulator rejected topology (" + reason + "): " + e.what());
  }
}

std::size_t SimReconciler::drain() {
  std::lock_guard lock(mu_);
  std::vector<store::Delta> batch;
  try {
    batch = sub_->drain();
    for (const auto& d : batch) store::fold(mirror_, d);
  } catch (const Error& e) {
    if (logs_) logs_->append("warn", "", std::string("reconciler resync: ") + e.what());
    rebuild(e.what());
    return 0;
  }
  if (batch.empty()) return 0;

  bool policy_only = true;
  for (const auto& d : batch) {
    policy_only &= d.kind == Kind::kPolicyJob && d.op == store::DeltaOp::kUpdate;
    for (const auto& [path, _] : d.changed_fields)
      policy_only &= path == "spec.guaranteed_mbps" || path == "spec.max_mbps";
  }
  try {
    if (policy_only) {
      const auto next = project(mirror_);
      for (const auto& d : batch) {
        const auto slice = mirror_.at(d.key()).at("slice").get<std::string>();
        for (const auto& p : next.slices)
          if (p.slice_name == slice) {
            sim_.apply_policy(p);
            ++policy_applications_;
            if (logs_)
              logs_->append("info", "Slice/" + slice,
                            "policy enforced: guaranteed " + format_number(p.guaranteed_mbps) + " Mbps, max " +
                                format_number(p.max_mbps) + " Mbps");
          }
      }
    } else {
      sim_.replace_state(project(mirror_));
    }
  } catch (const Error& e) {
    if (logs_) logs_->append("error", "", std::string("simulator update failed: ") + e.what());
  }
  return batch.size();
}

// ---------------------------------------------------------------- DeltaLogger

DeltaLogger::DeltaLogger(store::ResourceStore& store, tools::LogBuffer& logs) : store_(store), logs_(logs) {
  sub_.emplace(store_.watch({store_.version()}));
}

std::size_t DeltaLogger::drain() {
  std::lock_guard lock(mu_);
  std::vector<store::Delta> batch;
  try {
    batch = sub_->drain();
  } catch (const Error& e) {
    logs_.append("warn", "", std::string("log stream restarted: ") + e.what());
    sub_.emplace(store_.watch({store_.version()}));
    return 0;
  }
  for (const auto& d : batch) {
    std::string msg = "v" + std::to_string(d.version) + " ";
    switch (d.op) {
      case store::DeltaOp::kCreate: msg += "created"; break;
      case store::DeltaOp::kDelete: msg += "deleted"; break;
      case store::DeltaOp::kUpdate: msg += "updated " + store::summarize_changes(d); break;
    }
    logs_.append("info", d.key().str(), msg);
  }
  return batch.size();
}

// ---------------------------------------------------------------- Platform

Platform::Platform(const netsim::SimState& scenario, PlatformOptions options)
    : store_(options.store),
      sim_(netsim::SimState{{}, {}, {}, scenario.tick, scenario.seed}, options.kpi_history),
      index_(options.index),
      tools_(store_, &sim_, &logs_) {
  logger_ = std::make_unique<DeltaLogger>(store_, logs_);
  seed_store(store_, scenario);
  reconciler_ = std::make_unique<SimReconciler>(store_, sim_, &logs_);
  indexer_ = std::make_unique<index::ContextIndexer>(
      store_, index_, [this](const std::string& m) { logs_.append("warn", "", m); });
  settle();
  if (options.warmup_ticks > 0) sim_.advance(options.warmup_ticks);
}

std::unique_ptr<Platform> Platform::from_file(const std::string& scenario_path, PlatformOptions options) {
  return std::make_unique<Platform>(netsim::load_scenario_file(scenario_path), options);
}

void Platform::settle() {
  std::lock_guard lock(settle_mu_);
  reconciler_->drain();
  indexer_->drain();
  logger_->drain();
}

std::vector<netsim::KpiSample> Platform::advance(std::int64_t ticks) {
  settle();
  return sim_.advance(ticks);
}

}  // namespace ranagent::platform
