#pragma once

#include <span>
#include <vector>

#include "ranagent/netsim/types.hpp"

namespace ranagent::netsim {

/// Synthetic latency model: per-profile base plus a term proportional to
/// access-network utilisation, plus seeded sub-millisecond jitter.
inline constexpr double kEmbbBaseLatencyMs = 20.0;
inline constexpr double kUrllcBaseLatencyMs = 2.0;
inline constexpr double kLoadLatencyMs = 10.0;
inline constexpr double kMaxJitterMs = 0.5;

struct SliceDemand {
  double guaranteed_mbps = 0.0;
  double max_mbps = 0.0;
  double offered_mbps = 0.0;
};

/// Guarantees first (bounded by demand), then the residual capacity is
/// shared in proportion to each slice's unmet demand, clipped at max.
/// Every slice ends up with the same fraction of its unmet demand, so no
/// redistribution pass is needed.
std::vector<double> allocate_capacity(std::span<const SliceDemand> demands, double capacity_mbps);

/// Throws Error{kIntegrity} naming the dangling reference, Error{kValidation}
/// for field invariants and Error{kAdmission} when guarantees exceed capacity.
void validate(const SimState& state);

const SimAccessNetwork* find_access_network(const SimState& state, std::string_view name);
const SimTerminal* find_terminal(const SimState& state, std::string_view name);

struct StepResult {
  SimState state;
  std::vector<KpiSample> samples;
};

/// Advances `dt` ticks. Emits one sample per slice and per attached terminal
/// for every tick, slices first, in state order.
StepResult step(const SimState& state, std::int64_t dt);

/// Returns a copy of `state` with the policy installed (replacing any policy
/// with the same slice name). The input is never modified.
SimState apply_slice_policy(const SimState& state, const SlicePolicy& policy);

TopologyReport snapshot_topology(const SimState& state);

}  // namespace ranagent::netsim
