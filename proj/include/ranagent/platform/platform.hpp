#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "ranagent/index/context_index.hpp"
#include "ranagent/netsim/simulator.hpp"
#include "ranagent/store/resource_store.hpp"
#include "ranagent/tools/log_buffer.hpp"
#include "ranagent/tools/registry.hpp"

namespace ranagent::platform {

/// Writes a scenario into an empty store as resources. RICs become
/// "<network>-ric-<n>" and each slice gets a PolicyJob of the same name.
void seed_store(store::ResourceStore& store, const netsim::SimState& scenario);

/// Store specs -> simulator topology and policies. Slices without a
/// PolicyJob are not scheduled; their members fall back to best effort.
netsim::SimState project(const store::SpecMap& specs);

/// Watch subscriber that keeps the simulator in line with the store.
/// Batches touching only PolicyJob throughput go through the policy path;
/// anything else re-projects the whole topology.
class SimReconciler {
 public:
  SimReconciler(store::ResourceStore& store, netsim::Simulator& sim, tools::LogBuffer* logs = nullptr);

  std::size_t drain();
  std::size_t policy_applications() const { return policy_applications_; }

 private:
  void rebuild(const std::string& reason);

  store::ResourceStore& store_;
  netsim::Simulator& sim_;
  tools::LogBuffer* logs_;
  std::mutex mu_;
  std::optional<store::Subscription> sub_;
  store::SpecMap mirror_;
  std::size_t policy_applications_ = 0;
};

/// Writes one log line per committed delta.
class DeltaLogger {
 public:
  DeltaLogger(store::ResourceStore& store, tools::LogBuffer& logs);
  std::size_t drain();

 private:
  store::ResourceStore& store_;
  tools::LogBuffer& logs_;
  std::mutex mu_;
  std::optional<store::Subscription> sub_;
};

struct PlatformOptions {
  store::StoreOptions store;
  index::IndexOptions index;
  std::size_t kpi_history = 600;
  /// Ticks simulated after seeding so KPI collectors have data.
  std::int64_t warmup_ticks = 5;
};

/// One deployment: store, simulator, context index and tools wired through
/// watch subscriptions.
class Platform {
 public:
  explicit Platform(const netsim::SimState& scenario, PlatformOptions options = {});
  static std::unique_ptr<Platform> from_file(const std::string& scenario_path, PlatformOptions options = {});

  store::ResourceStore& store() { return store_; }
  netsim::Simulator& sim() { return sim_; }
  index::ContextIndex& index() { return index_; }
  tools::ToolRegistry& tools() { return tools_; }
  tools::LogBuffer& logs() { return logs_; }
  const store::ResourceStore& store() const { return store_; }
  const netsim::Simulator& sim() const { return sim_; }
  const index::ContextIndex& index() const { return index_; }

  /// Brings simulator, index and logs up to the current store version.
  void settle();
  /// settle() then step the simulator.
  std::vector<netsim::KpiSample> advance(std::int64_t ticks = 1);

 private:
  store::ResourceStore store_;
  netsim::Simulator sim_;
  tools::LogBuffer logs_;
  index::ContextIndex index_;
  std::unique_ptr<SimReconciler> reconciler_;
  std::unique_ptr<index::ContextIndexer> indexer_;
  std::unique_ptr<DeltaLogger> logger_;
  tools::ToolRegistry tools_;
  std::mutex settle_mu_;
};

}  // namespace ranagent::platform
