#pragma once

#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"
#include "ranagent/netsim/model.hpp"

namespace ranagent::netsim {

/// Scenario fixture <-> state. Schema documented in docs/formats.md.
SimState load_scenario(const json& doc);
SimState load_scenario_file(const std::string& path);
json scenario_to_json(const SimState& state);

json to_json(const KpiSample& sample);
KpiSample kpi_from_json(const json& doc);
void write_kpi_ndjson(std::ostream& out, const std::vector<KpiSample>& samples);

/// Owner of the live simulation. Writers (advance, policy, topology) are
/// serialised; readers get immutable published snapshots and never block on
/// a step in progress.
class Simulator {
 public:
  explicit Simulator(SimState initial, std::size_t history_per_scope = 600);

  std::shared_ptr<const SimState> snapshot() const;

  std::vector<KpiSample> advance(std::int64_t ticks = 1);
  void apply_policy(const SlicePolicy& policy);
  /// Replaces topology and policies, keeping the current tick and seed.
  void replace_state(SimState next);

  /// Samples with from_tick <= timestamp <= to_tick, oldest first.
  std::vector<KpiSample> series(const std::string& scope_key, std::int64_t from_tick,
                                std::int64_t to_tick) const;
  std::optional<KpiSample> latest(const std::string& scope_key) const;
  std::vector<std::string> scope_keys() const;

 private:
  void publish(SimState next);

  std::mutex write_mu_;
  mutable std::shared_mutex read_mu_;
  std::shared_ptr<const SimState> current_;
  std::map<std::string, std::deque<KpiSample>> history_;
  std::size_t history_per_scope_;
};

}  // namespace ranagent::netsim
