#pragma once

#include <string>
#include <vector>

#include "ranagent/store/resource.hpp"

namespace ranagent::store {

/// A spec field that names another resource.
struct Reference {
  std::string field;  ///< top-level spec key
  Kind target;
  bool is_list = false;
  bool nullable = false;
};

const std::vector<Reference>& references_of(Kind kind);

/// Names referenced by `spec` through the kind's reference fields.
std::vector<ResourceKey> referenced_keys(Kind kind, const json& spec);

/// Structural validation of one spec. Throws Error{kValidation} whose message
/// starts with the offending field path ("spec.max_mbps: ...").
///
///   Network        core_present?: bool
///   AccessNetwork  network: ref, cell_capacity_mbps: >0, status?: up|degraded|down,
///                  cells?: [{cell_id, prb_total > 0, center_frequency_mhz?}]
///   Ric            network: ref, type?: near-rt|non-rt
///   Terminal       access_network?: ref|null, profile: embb|urllc, offered_load_mbps: >=0
///   Slice          access_network: ref, members?: [ref Terminal]
///   PolicyJob      slice: ref, guaranteed_mbps: >=0, max_mbps: >=guaranteed_mbps
///
/// Every kind also accepts a free-form "labels" object.
void validate_spec(Kind kind, const json& spec);

/// Identifier rule shared by names and spec keys: non-empty, [A-Za-z0-9_-].
bool valid_identifier(const std::string& name);

}  // namespace ranagent::store
