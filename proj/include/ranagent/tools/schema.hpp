#pragma once

#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"
#include "ranagent/store/resource.hpp"

namespace ranagent::tools {

enum class ToolKind { kMonitoring, kDeployment };

std::string_view to_string(ToolKind kind);

struct ToolParam {
  std::string name;
  std::string type;  ///< string | integer | number | boolean | string[]
  bool required = false;
  std::string description;
};

struct ToolSchema {
  std::string name;
  ToolKind kind = ToolKind::kMonitoring;
  std::string description;
  std::vector<ToolParam> parameters;
  std::vector<store::Kind> mutates;  ///< deployment tools only

  const ToolParam* param(const std::string& name) const;
};

json to_json(const ToolSchema& schema);

/// Monitoring tools followed by the deployment catalog, in a fixed order.
const std::vector<ToolSchema>& builtin_schemas();
const ToolSchema* find_schema(const std::string& name);

/// Checked view over a call's arguments. Rejects parameters the schema
/// does not declare and values of the wrong type with Error{kArgument}
/// whose message starts with the parameter name.
class Args {
 public:
  Args(const ToolSchema& schema, const json& args);

  bool has(const std::string& name) const;
  std::string str(const std::string& name) const;
  std::string str_or(const std::string& name, const std::string& fallback) const;
  double number(const std::string& name) const;
  double number_or(const std::string& name, double fallback) const;
  std::int64_t integer_or(const std::string& name, std::int64_t fallback) const;
  bool boolean_or(const std::string& name, bool fallback) const;
  std::vector<std::string> strings(const std::string& name) const;

 private:
  const json& require(const std::string& name) const;

  json args_;
};

}  // namespace ranagent::tools
