#include "ranagent/store/schema.hpp"

#include <cctype>
#include <set>

#include "ranagent/common/error.hpp"

namespace ranagent::store {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kValidation, path + ": " + msg);
}

const json* field(const json& spec, const char* key) {
  auto it = spec.find(key);
  return it == spec.end() ? nullptr : &*it;
}

void require_string(const json& spec, const char* key, bool required = true) {
  const json* f = field(spec, key);
  if (!f) {
    if (required) bad(std::string("spec.") + key, "required");
    return;
  }
  if (!f->is_string() || f->get<std::string>().empty())
    bad(std::string("spec.") + key, "expected a non-empty string");
}

double require_number(const json& spec, const char* key, double min, bool strict) {
  const json* f = field(spec, key);
  if (!f) bad(std::string("spec.") + key, "required");
  if (!f->is_number()) bad(std::string("spec.") + key, "expected a number");
  const double v = f->get<double>();
  if (strict ? !(v > min) : !(v >= min))
    bad(std::string("spec.") + key, std::string("must be ") + (strict ? "> " : ">= ") +
                                        std::to_string(static_cast<long long>(min)));
  return v;
}

void require_enum(const json& spec, const char* key, std::initializer_list<const char*> values,
                  bool required) {
  const json* f = field(spec, key);
  if (!f) {
    if (required) bad(std::string("spec.") + key, "required");
    return;
  }
  if (f->is_string())
    for (const char* v : values)
      if (*f == v) return;
  std::string allowed;
  for (const char* v : values) allowed += (allowed.empty() ? "" : "|") + std::string(v);
  bad(std::string("spec.") + key, "expected one of " + allowed);
}

void check_keys(const json& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : spec.items()) {
    if (key == "labels") continue;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) bad("spec." + key, "unknown field");
  }
  if (const json* labels = field(spec, "labels"); labels && !labels->is_object())
    bad("spec.labels", "expected an object");
}

}  // namespace

bool valid_identifier(const std::string& name) {
  if (name.empty()) return false;
  for (unsigned char c : name)
    if (!std::isalnum(c) && c != '_' && c != '-') return false;
  return true;
}

const std::vector<Reference>& references_of(Kind kind) {
  static const std::vector<Reference> none;
  static const std::vector<Reference> access{{"network", Kind::kNetwork}};
  static const std::vector<Reference> ric{{"network", Kind::kNetwork}};
  static const std::vector<Reference> terminal{{"access_network", Kind::kAccessNetwork, false, true}};
  static const std::vector<Reference> slice{{"access_network", Kind::kAccessNetwork},
                                            {"members", Kind::kTerminal, true}};
  static const std::vector<Reference> policy{{"slice", Kind::kSlice}};
  switch (kind) {
    case Kind::kNetwork: return none;
    case Kind::kAccessNetwork: return access;
    case Kind::kRic: return ric;
    case Kind::kTerminal: return terminal;
    case Kind::kSlice: return slice;
    case Kind::kPolicyJob: return policy;
  }
  return none;
}

std::vector<ResourceKey> referenced_keys(Kind kind, const json& spec) {
  std::vector<ResourceKey> out;
  for (const auto& ref : references_of(kind)) {
    const json* f = field(spec, ref.field.c_str());
    if (!f || f->is_null()) continue;
    if (ref.is_list) {
      for (const auto& item : *f)
        if (item.is_string()) out.push_back({ref.target, item.get<std::string>()});
    } else if (f->is_string()) {
      out.push_back({ref.target, f->get<std::string>()});
    }
  }
  return out;
}

void validate_spec(Kind kind, const json& spec) {
  if (!spec.is_object()) bad("spec", "expected an object");
  switch (kind) {
    case Kind::kNetwork:
      check_keys(spec, {"core_present"});
      if (const json* f = field(spec, "core_present"); f && !f->is_boolean())
        bad("spec.core_present", "expected a boolean");
      break;
    case Kind::kAccessNetwork: {
      check_keys(spec, {"network", "cell_capacity_mbps", "status", "cells"});
      require_string(spec, "network");
      require_number(spec, "cell_capacity_mbps", 0.0, true);
      require_enum(spec, "status", {"up", "degraded", "down"}, false);
      if (const json* cells = field(spec, "cells")) {
        if (!cells->is_array()) bad("spec.cells", "expected an array");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < cells->size(); ++i) {
          const auto& c = (*cells)[i];
          const std::string at = "spec.cells." + std::to_string(i);
          if (!c.is_object()) bad(at, "expected an object");
          if (!c.contains("cell_id") || !c["cell_id"].is_string()) bad(at + ".cell_id", "required string");
          if (!ids.insert(c["cell_id"].get<std::string>()).second) bad(at + ".cell_id", "duplicate");
          if (!c.contains("prb_total") || !c["prb_total"].is_number_integer() || c["prb_total"].get<int>() <= 0)
            bad(at + ".prb_total", "must be an integer > 0");
          if (c.contains("center_frequency_mhz") && !c["center_frequency_mhz"].is_number())
            bad(at + ".center_frequency_mhz", "expected a number");
        }
      }
      break;
    }
    case Kind::kRic:
      check_keys(spec, {"network", "type"});
      require_string(spec, "network");
      require_enum(spec, "type", {"near-rt", "non-rt"}, false);
      break;
    case Kind::kTerminal: {
      check_keys(spec, {"access_network", "profile", "offered_load_mbps"});
      const json* an = field(spec, "access_network");
      if (an && !an->is_null()) require_string(spec, "access_network");
      require_enum(spec, "profile", {"embb", "urllc"}, true);
      require_number(spec, "offered_load_mbps", 0.0, false);
      break;
    }
    case Kind::kSlice: {
      check_keys(spec, {"access_network", "members"});
      require_string(spec, "access_network");
      if (const json* m = field(spec, "members")) {
        if (!m->is_array()) bad("spec.members", "expected an array");
        std::set<std::string> seen;
        for (const auto& item : *m) {
          if (!item.is_string()) bad("spec.members", "expected terminal names");
          if (!seen.insert(item.get<std::string>()).second) bad("spec.members", "duplicate member");
        }
      }
      break;
    }
    case Kind::kPolicyJob: {
      check_keys(spec, {"slice", "guaranteed_mbps", "max_mbps"});
      require_string(spec, "slice");
      const double g = require_number(spec, "guaranteed_mbps", 0.0, false);
      const double m = require_number(spec, "max_mbps", 0.0, false);
      if (g > m) bad("spec.guaranteed_mbps", "must be <= spec.max_mbps");
      break;
    }
  }
}

}  // namespace ranagent::store
