#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ranagent::netsim {

enum class LinkStatus { kUp, kDegraded, kDown };
enum class Profile { kEmbb, kUrllc };

std::string_view to_string(LinkStatus s);
std::string_view to_string(Profile p);
LinkStatus parse_status(std::string_view s);
Profile parse_profile(std::string_view s);

struct SimCell {
  std::string cell_id;
  int prb_total = 0;
  double center_frequency_mhz = 0.0;
};

struct SimAccessNetwork {
  std::string name;
  std::string parent_network;
  double cell_capacity_mbps = 0.0;
  LinkStatus status = LinkStatus::kUp;
  std::vector<SimCell> cells;

  int prb_total() const;
  /// Capacity actually schedulable given the link status.
  double effective_capacity_mbps() const;
};

struct SimNetwork {
  std::string name;
  std::vector<SimAccessNetwork> access_networks;
  int rics = 0;
  bool core_present = false;
};

struct SimTerminal {
  std::string name;
  std::optional<std::string> attached_to;
  Profile profile = Profile::kEmbb;
  double offered_load_mbps = 0.0;
};

/// `network` names the access network the slice is scheduled on.
struct SlicePolicy {
  std::string slice_name;
  std::string network;
  double guaranteed_mbps = 0.0;
  double max_mbps = 0.0;
  std::vector<std::string> member_terminals;
};

enum class ScopeKind { kSlice, kTerminal };

struct KpiScope {
  std::string network;
  std::string access_network;
  ScopeKind kind = ScopeKind::kSlice;
  std::string name;

  /// "slice/<name>" or "terminal/<name>".
  std::string key() const;
};

struct KpiSample {
  std::int64_t timestamp = 0;
  KpiScope scope;
  double throughput_mbps = 0.0;
  double latency_ms = 0.0;
  int prb_used = 0;
};

struct SimState {
  std::vector<SimNetwork> networks;
  std::vector<SimTerminal> terminals;
  std::vector<SlicePolicy> slices;
  std::int64_t tick = 0;
  std::uint64_t seed = 0;
};

struct TopologyReport {
  std::vector<std::string> networks;
  std::vector<std::string> access_networks;
  std::vector<std::string> terminals;
  std::vector<std::string> slices;
  int rics = 0;
};

}  // namespace ranagent::netsim
