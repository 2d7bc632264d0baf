#include "ranagent/store/resource.hpp"

#include <array>

#include "ranagent/common/error.hpp"

namespace ranagent::store {

namespace {

constexpr std::array<std::pair<Kind, std::string_view>, 6> kKindNames{{
    {Kind::kNetwork, "Network"},
    {Kind::kAccessNetwork, "AccessNetwork"},
    {Kind::kRic, "Ric"},
    {Kind::kTerminal, "Terminal"},
    {Kind::kSlice, "Slice"},
    {Kind::kPolicyJob, "PolicyJob"},
}};

std::optional<json> some(const json& v) { return std::optional<json>(std::in_place, v); }

json change_to_json(const FieldChange& c) {
  json j = json::object();
  if (c.old_value) j["old"] = *c.old_value;
  if (c.new_value) j["new"] = *c.new_value;
  return j;
}

}  // namespace

std::string_view to_string(Kind kind) {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "?";
}

Kind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw Error(ErrorCode::kUnknownKind, "unknown resource kind '" + std::string(name) + "'");
}

const std::vector<Kind>& all_kinds() {
  static const std::vector<Kind> kinds = [] {
    std::vector<Kind> v;
    for (const auto& [k, _] : kKindNames) v.push_back(k);
    return v;
  }();
  return kinds;
}

std::string ResourceKey::str() const { return std::string(to_string(kind)) + "/" + name; }

std::string_view to_string(DeltaOp op) {
  switch (op) {
    case DeltaOp::kCreate: return "create";
    case DeltaOp::kUpdate: return "update";
    case DeltaOp::kDelete: return "delete";
  }
  return "?";
}

json to_json(const Delta& d) {
  json fields = json::object();
  for (const auto& [path, change] : d.changed_fields) fields[path] = change_to_json(change);
  return {{"version", d.version},
          {"kind", to_string(d.kind)},
          {"name", d.name},
          {"op", to_string(d.op)},
          {"changed_fields", std::move(fields)}};
}

Delta delta_from_json(const json& doc) {
  Delta d;
  d.version = doc.at("version").get<std::int64_t>();
  d.kind = parse_kind(doc.at("kind").get<std::string>());
  d.name = doc.at("name").get<std::string>();
  const auto op = doc.at("op").get<std::string>();
  d.op = op == "create" ? DeltaOp::kCreate : op == "update" ? DeltaOp::kUpdate : DeltaOp::kDelete;
  for (const auto& [path, change] : doc.at("changed_fields").items()) {
    FieldChange c;
    if (change.contains("old")) c.old_value = some(change["old"]);
    if (change.contains("new")) c.new_value = some(change["new"]);
    d.changed_fields.emplace(path, std::move(c));
  }
  return d;
}

json to_json(const Resource& r) {
  return {{"kind", to_string(r.kind)},
          {"name", r.name},
          {"spec", r.spec},
          {"version", r.version},
          {"deleted", r.deleted}};
}

std::string summarize_changes(const Delta& delta) {
  std::string out;
  for (const auto& [path, c] : delta.changed_fields) {
    if (!out.empty()) out += ", ";
    out += path + " " + (c.old_value ? render_value(*c.old_value) : "(none)") + "->" +
           (c.new_value ? render_value(*c.new_value) : "(none)");
  }
  return out;
}

std::optional<Delta> diff_specs(Kind kind, const std::string& name, const std::optional<json>& before,
                                const std::optional<json>& after) {
  if (!before && !after) return std::nullopt;
  Delta d;
  d.kind = kind;
  d.name = name;
  d.op = !before ? DeltaOp::kCreate : !after ? DeltaOp::kDelete : DeltaOp::kUpdate;
  const auto old_flat = before ? flatten(*before, "spec") : std::map<std::string, json>{};
  const auto new_flat = after ? flatten(*after, "spec") : std::map<std::string, json>{};
  for (const auto& [path, value] : old_flat) {
    auto it = new_flat.find(path);
    if (it == new_flat.end()) {
      d.changed_fields[path] = {some(value), std::nullopt};
    } else if (it->second != value) {
      d.changed_fields[path] = {some(value), some(it->second)};
    }
  }
  for (const auto& [path, value] : new_flat) {
    if (!old_flat.count(path)) d.changed_fields[path] = {std::nullopt, some(value)};
  }
  if (d.op == DeltaOp::kUpdate && d.changed_fields.empty()) return std::nullopt;
  return d;
}

void fold(SpecMap& state, const Delta& delta) {
  const auto key = delta.key();
  auto it = state.find(key);
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kIntegrity,
                "delta v" + std::to_string(delta.version) + " for " + key.str() + ": " + why);
  };
  switch (delta.op) {
    case DeltaOp::kCreate:
      if (it != state.end()) fail("create over a live resource");
      break;
    case DeltaOp::kUpdate:
    case DeltaOp::kDelete:
      if (it == state.end()) fail("resource not present");
      break;
  }
  if (delta.op == DeltaOp::kDelete) {
    state.erase(it);
    return;
  }

  json wrapper = {{"spec", it == state.end() ? json::object() : it->second}};
  // Removals first, so a leaf replaced by a sub-object (or vice versa) folds cleanly.
  for (const auto& [path, change] : delta.changed_fields) {
    if (change.old_value) {
      const json* current = find_path(wrapper, path);
      if (!current || *current != *change.old_value) fail("stale old value at " + path);
      remove_path(wrapper, path);
    }
  }
  for (const auto& [path, change] : delta.changed_fields) {
    if (change.new_value) set_path(wrapper, path, *change.new_value);
  }
  json spec = wrapper.contains("spec") ? wrapper["spec"] : json::object();
  state[key] = std::move(spec);
}

}  // namespace ranagent::store
