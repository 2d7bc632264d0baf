#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ranagent/common/json_util.hpp"

namespace ranagent::store {

enum class Kind { kNetwork, kAccessNetwork, kRic, kTerminal, kSlice, kPolicyJob };

std::string_view to_string(Kind kind);
/// Throws Error{kUnknownKind}.
Kind parse_kind(std::string_view name);
const std::vector<Kind>& all_kinds();

struct ResourceKey {
  Kind kind;
  std::string name;

  auto operator<=>(const ResourceKey&) const = default;
  /// "<Kind>/<name>"
  std::string str() const;
};

struct Resource {
  Kind kind;
  std::string name;
  json spec;
  std::int64_t version = 0;
  bool deleted = false;
};

enum class DeltaOp { kCreate, kUpdate, kDelete };
std::string_view to_string(DeltaOp op);

/// Absent sides are std::nullopt (create has no old, delete has no new).
struct FieldChange {
  std::optional<json> old_value;
  std::optional<json> new_value;

  bool operator==(const FieldChange&) const = default;
};

struct Delta {
  std::int64_t version = 0;
  Kind kind = Kind::kNetwork;
  std::string name;
  DeltaOp op = DeltaOp::kCreate;
  /// Dotted field path ("spec.max_mbps") -> change.
  std::map<std::string, FieldChange> changed_fields;

  ResourceKey key() const { return {kind, name}; }
  bool operator==(const Delta&) const = default;
};

json to_json(const Delta& delta);
Delta delta_from_json(const json& doc);
json to_json(const Resource& resource);

/// One-line human summary of changed fields: "spec.max_mbps 10->30".
std::string summarize_changes(const Delta& delta);

/// Live specs keyed by resource identity.
using SpecMap = std::map<ResourceKey, json>;

/// Builds the delta that turns `before` into `after` (either may be absent).
/// Returns nullopt when nothing changed.
std::optional<Delta> diff_specs(Kind kind, const std::string& name, const std::optional<json>& before,
                                const std::optional<json>& after);

/// Applies one delta to a spec map. Throws Error{kIntegrity} when the delta
/// does not fit the map (create over a live key, update/delete of a missing
/// key, or an old value that does not match).
void fold(SpecMap& state, const Delta& delta);

}  // namespace ranagent::store
