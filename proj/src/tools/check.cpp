#include <set>

#include "ranagent/common/error.hpp"
#include "ranagent/tools/registry.hpp"

namespace ranagent::tools {

using store::ResourceKey;

Expectation expectation_from_json(const json& doc) {
  Expectation e;
  e.kind = store::parse_kind(doc.at("kind").get<std::string>());
  if (doc.contains("name")) e.name = doc.at("name").get<std::string>();
  e.prefix = doc.value("prefix", std::string());
  e.exists = doc.value("exists", true);
  if (doc.contains("count")) e.count = doc.at("count").get<std::size_t>();
  e.fields = doc.value("fields", json::object());
  if (!e.name && !e.count) throw Error(ErrorCode::kValidation, "expectation needs either name or count");
  return e;
}

json to_json(const Expectation& e) {
  json out = {{"kind", store::to_string(e.kind)}, {"exists", e.exists}};
  if (e.name) out["name"] = *e.name;
  if (!e.prefix.empty()) out["prefix"] = e.prefix;
  if (e.count) out["count"] = *e.count;
  if (!e.fields.empty()) out["fields"] = e.fields;
  return out;
}

namespace {

bool fields_match(const json& spec, const json& fields) {
  for (const auto& [path, want] : fields.items()) {
    std::string p = path.rfind("spec.", 0) == 0 ? path.substr(5) : path;
    const json* got = find_path(spec, p);
    if (!got) return false;
    if (got->is_number() && want.is_number()) {
      if (got->get<double>() != want.get<double>()) return false;
    } else if (*got != want) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool check_action(const std::vector<Expectation>& expected, const store::SpecMap& before,
                  const store::SpecMap& after) {
  std::set<ResourceKey> changed;
  for (const auto& [k, spec] : before) {
    auto it = after.find(k);
    if (it == after.end() || it->second != spec) changed.insert(k);
  }
  for (const auto& [k, _] : after)
    if (!before.count(k)) changed.insert(k);

  std::set<ResourceKey> accounted;
  for (const auto& e : expected) {
    if (e.name) {
      const ResourceKey key{e.kind, *e.name};
      auto it = after.find(key);
      if ((it != after.end()) != e.exists) return false;
      if (e.exists && !fields_match(it->second, e.fields)) return false;
      accounted.insert(key);
      continue;
    }
    std::size_t n = 0;
    for (const auto& k : changed) {
      if (k.kind != e.kind || k.name.rfind(e.prefix, 0) != 0) continue;
      auto it = after.find(k);
      if ((it != after.end()) != e.exists) continue;
      if (e.exists && !fields_match(it->second, e.fields)) continue;
      ++n;
      accounted.insert(k);
    }
    if (n != *e.count) return false;
  }
  for (const auto& k : changed)
    if (!accounted.count(k)) return false;
  return true;
}

}  // namespace ranagent::tools
