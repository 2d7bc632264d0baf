#include "ranagent/netsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ranagent/common/error.hpp"
#include "ranagent/common/json_util.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::netsim {

namespace {

[[noreturn]] void integrity(const std::string& what) { throw Error(ErrorCode::kIntegrity, what); }
[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kValidation, what); }

double base_latency(Profile p) {
  return p == Profile::kUrllc ? kUrllcBaseLatencyMs : kEmbbBaseLatencyMs;
}

double jitter_ms(std::uint64_t seed, std::int64_t tick, const std::string& name) {
  const std::string key = std::to_string(seed) + ":" + std::to_string(tick) + ":" + name;
  return static_cast<double>(fnv1a(key) % 1000) / 1000.0 * kMaxJitterMs;
}

int prb_for(double throughput, double capacity, int prb_total) {
  if (capacity <= 0.0 || prb_total <= 0) return 0;
  const int used = static_cast<int>(std::floor(throughput / capacity * prb_total));
  return std::clamp(used, 0, prb_total);
}

}  // namespace

std::vector<double> allocate_capacity(std::span<const SliceDemand> demands, double capacity_mbps) {
  std::vector<double> alloc(demands.size(), 0.0);
  std::vector<double> unmet(demands.size(), 0.0);
  double base_total = 0.0;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const auto& d = demands[i];
    const double ceiling = std::min(d.offered_mbps, d.max_mbps);
    alloc[i] = std::min(d.guaranteed_mbps, ceiling);
    unmet[i] = ceiling - alloc[i];
    base_total += alloc[i];
  }
  if (capacity_mbps <= 0.0) return std::vector<double>(demands.size(), 0.0);
  if (base_total > capacity_mbps) {
    // Only reachable when a degraded link can no longer honour admitted
    // guarantees: scale them down uniformly.
    const double scale = capacity_mbps / base_total;
    for (auto& a : alloc) a *= scale;
    return alloc;
  }
  double unmet_total = 0.0;
  for (double u : unmet) unmet_total += u;
  if (unmet_total <= 0.0) return alloc;
  const double fraction = std::min(1.0, (capacity_mbps - base_total) / unmet_total);
  for (std::size_t i = 0; i < alloc.size(); ++i) alloc[i] += unmet[i] * fraction;
  return alloc;
}

const SimAccessNetwork* find_access_network(const SimState& state, std::string_view name) {
  for (const auto& n : state.networks)
    for (const auto& a : n.access_networks)
      if (a.name == name) return &a;
  return nullptr;
}

const SimTerminal* find_terminal(const SimState& state, std::string_view name) {
  for (const auto& t : state.terminals)
    if (t.name == name) return &t;
  return nullptr;
}

void validate(const SimState& state) {
  std::set<std::string> networks, access, terminals, slices;
  for (const auto& n : state.networks) {
    if (!networks.insert(n.name).second) invalid("network '" + n.name + "': duplicate name");
    if (n.rics < 0) invalid("network '" + n.name + "'.rics: must be >= 0");
    for (const auto& a : n.access_networks) {
      if (!access.insert(a.name).second) invalid("access network '" + a.name + "': duplicate name");
      if (a.parent_network != n.name)
        integrity("access network '" + a.name + "'.parent_network: '" + a.parent_network +
                  "' does not match containing network '" + n.name + "'");
      if (!(a.cell_capacity_mbps > 0.0))
        invalid("access network '" + a.name + "'.cell_capacity_mbps: must be > 0");
      for (const auto& c : a.cells)
        if (c.prb_total <= 0) invalid("cell '" + c.cell_id + "'.prb_total: must be > 0");
    }
  }
  for (const auto& t : state.terminals) {
    if (!terminals.insert(t.name).second) invalid("terminal '" + t.name + "': duplicate name");
    if (t.offered_load_mbps < 0.0) invalid("terminal '" + t.name + "'.offered_load_mbps: must be >= 0");
    if (t.attached_to && !access.count(*t.attached_to))
      integrity("terminal '" + t.name + "'.attached_to: unknown access network '" + *t.attached_to + "'");
  }
  std::map<std::string, double> guaranteed;
  for (const auto& s : state.slices) {
    if (!slices.insert(s.slice_name).second) invalid("slice '" + s.slice_name + "': duplicate name");
    if (!access.count(s.network))
      integrity("slice '" + s.slice_name + "'.network: unknown access network '" + s.network + "'");
    for (const auto& m : s.member_terminals)
      if (!terminals.count(m))
        integrity("slice '" + s.slice_name + "'.member_terminals: unknown terminal '" + m + "'");
    if (s.guaranteed_mbps < 0.0 || s.guaranteed_mbps > s.max_mbps)
      invalid("slice '" + s.slice_name + "': requires 0 <= guaranteed_mbps <= max_mbps");
    guaranteed[s.network] += s.guaranteed_mbps;
  }
  for (const auto& [name, sum] : guaranteed) {
    const auto* a = find_access_network(state, name);
    if (sum > a->cell_capacity_mbps + 1e-9)
      throw Error(ErrorCode::kAdmission, "access network '" + name + "': guaranteed total " +
                                             format_number(sum) + " Mbps exceeds capacity " +
                                             format_number(a->cell_capacity_mbps) + " Mbps");
  }
}

StepResult step(const SimState& state, std::int64_t dt) {
  if (dt <= 0) invalid("step: dt must be > 0");
  validate(state);

  StepResult result{state, {}};
  for (std::int64_t k = 1; k <= dt; ++k) {
    const std::int64_t tick = state.tick + k;
    for (const auto& net : state.networks) {
      for (const auto& an : net.access_networks) {
        // Slices scheduled on this access network, plus one best-effort pool
        // for attached terminals outside every slice.
        std::vector<const SlicePolicy*> local;
        std::set<std::string> sliced;
        for (const auto& s : state.slices) {
          if (s.network != an.name) continue;
          local.push_back(&s);
          sliced.insert(s.member_terminals.begin(), s.member_terminals.end());
        }
        std::vector<std::vector<const SimTerminal*>> members(local.size() + 1);
        for (std::size_t i = 0; i < local.size(); ++i) {
          for (const auto& m : local[i]->member_terminals) {
            const auto* t = find_terminal(state, m);
            if (t->attached_to && *t->attached_to == an.name) members[i].push_back(t);
          }
        }
        for (const auto& t : state.terminals) {
          if (t.attached_to && *t.attached_to == an.name && !sliced.count(t.name))
            members.back().push_back(&t);
        }

        std::vector<SliceDemand> demands(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
          double load = 0.0;
          for (const auto* t : members[i]) load += t->offered_load_mbps;
          demands[i].offered_mbps = load;
          if (i < local.size()) {
            demands[i].guaranteed_mbps = local[i]->guaranteed_mbps;
            demands[i].max_mbps = local[i]->max_mbps;
          } else {
            demands[i].max_mbps = load;
          }
        }
        const double capacity = an.effective_capacity_mbps();
        const auto alloc = allocate_capacity(demands, capacity);
        double served = 0.0;
        for (double a : alloc) served += a;
        const double utilisation = an.cell_capacity_mbps > 0 ? served / an.cell_capacity_mbps : 0.0;

        std::vector<KpiSample> terminal_samples;
        std::vector<KpiSample> slice_samples;
        for (std::size_t i = 0; i < members.size(); ++i) {
          double weighted_latency = 0.0;
          for (const auto* t : members[i]) {
            const double share = demands[i].offered_mbps > 0.0
                                     ? alloc[i] * t->offered_load_mbps / demands[i].offered_mbps
                                     : 0.0;
            KpiSample s;
            s.timestamp = tick;
            s.scope = {net.name, an.name, ScopeKind::kTerminal, t->name};
            s.throughput_mbps = share;
            s.latency_ms = base_latency(t->profile) + kLoadLatencyMs * utilisation +
                           jitter_ms(state.seed, tick, t->name);
            s.prb_used = prb_for(share, an.cell_capacity_mbps, an.prb_total());
            weighted_latency += s.latency_ms * t->offered_load_mbps;
            terminal_samples.push_back(std::move(s));
          }
          if (i < local.size()) {
            KpiSample s;
            s.timestamp = tick;
            s.scope = {net.name, an.name, ScopeKind::kSlice, local[i]->slice_name};
            s.throughput_mbps = alloc[i];
            s.latency_ms = demands[i].offered_mbps > 0.0
                               ? weighted_latency / demands[i].offered_mbps
                               : 0.0;
            s.prb_used = prb_for(alloc[i], an.cell_capacity_mbps, an.prb_total());
            slice_samples.push_back(std::move(s));
          }
        }
        for (auto& s : slice_samples) result.samples.push_back(std::move(s));
        for (auto& s : terminal_samples) result.samples.push_back(std::move(s));
      }
    }
  }
  result.state.tick = state.tick + dt;
  return result;
}

SimState apply_slice_policy(const SimState& state, const SlicePolicy& policy) {
  if (policy.guaranteed_mbps < 0.0 || policy.guaranteed_mbps > policy.max_mbps)
    invalid("slice '" + policy.slice_name + "': requires 0 <= guaranteed_mbps <= max_mbps");
  SimState next = state;
  auto it = std::find_if(next.slices.begin(), next.slices.end(),
                         [&](const SlicePolicy& s) { return s.slice_name == policy.slice_name; });
  if (it == next.slices.end()) {
    next.slices.push_back(policy);
  } else {
    *it = policy;
  }
  validate(next);  // admission failures leave `state` untouched
  return next;
}

TopologyReport snapshot_topology(const SimState& state) {
  TopologyReport r;
  for (const auto& n : state.networks) {
    r.networks.push_back(n.name);
    r.rics += n.rics;
    for (const auto& a : n.access_networks) r.access_networks.push_back(a.name);
  }
  for (const auto& t : state.terminals) r.terminals.push_back(t.name);
  for (const auto& s : state.slices) r.slices.push_back(s.slice_name);
  return r;
}

}  // namespace ranagent::netsim
