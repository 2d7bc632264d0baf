#pragma once

#include <array>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ranagent/common/clock.hpp"
#include "ranagent/common/error.hpp"
#include "ranagent/netsim/simulator.hpp"
#include "ranagent/store/resource_store.hpp"
#include "ranagent/tools/log_buffer.hpp"
#include "ranagent/tools/schema.hpp"

namespace ranagent::tools {

inline constexpr int kToolSchemaVersion = 1;

/// Machine-checkable preflight reasons.
enum class Reason {
  kNotFound,
  kAlreadyExists,
  kInvalidArgument,
  kDependency,
  kAdmission,
  kToolNotFound,
  kConflict,
};

std::string_view to_string(Reason reason);
Reason reason_for(ErrorCode code);

struct PreflightReason {
  Reason reason = Reason::kInvalidArgument;
  std::string message;
  std::string parameter;  ///< set for argument errors
};

/// One planned store write; `spec` empty means delete.
struct WriteOp {
  store::Kind kind = store::Kind::kNetwork;
  std::string name;
  std::optional<json> spec;
};

json to_json(const WriteOp& op);

struct ToolAction {
  std::int64_t id = 0;
  std::string tool;
  json arguments;
  bool preflight_passed = false;
  std::vector<PreflightReason> reasons;
  bool executed = false;
  bool success = false;
  std::string error;
  /// Deltas emitted by this action, in commit order; includes the inverse
  /// writes when a rollback happened.
  std::vector<store::Delta> deltas;
  std::vector<WriteOp> inverse;  ///< one per forward write; undo in reverse order
  bool rolled_back = false;
  std::int64_t started_at_ms = 0;
  std::optional<SteadyClock::time_point> exec_started;
  Duration duration{0};

  bool mutated() const { return success && !deltas.empty(); }
};

json to_json(const ToolAction& action);

/// Reads used by the deployment planners. Implemented over both the live
/// store and a write session.
struct StoreReader {
  std::function<std::optional<store::Resource>(store::Kind, const std::string&)> find;
  std::function<std::vector<store::Resource>(store::Kind)> list;
};

/// Typed tool set over a resource store and, for KPI collectors, a
/// simulator. Monitoring calls are read-only; deployment calls run
/// preflight on a shadow copy of the store and then execute in a single
/// store transaction.
class ToolRegistry {
 public:
  ToolRegistry(store::ResourceStore& store, const netsim::Simulator* sim = nullptr,
               const LogBuffer* logs = nullptr);

  const std::vector<ToolSchema>& list_tools() const { return builtin_schemas(); }
  json catalog() const;

  /// {"schema_version", "tool", "data"}. Throws kToolNotFound, kArgument
  /// or kNotFound.
  json call_monitoring(const std::string& name, const json& args) const;

  /// Preflight only; never changes the store.
  std::vector<PreflightReason> preflight(const std::string& name, const json& args) const;

  ToolAction call_deployment(const std::string& name, const json& args);

  /// Undoes a successful action through its recorded inverses.
  std::vector<store::Delta> revert(const ToolAction& action);

  /// Test hook called before each write of an action with its 0-based
  /// position; throwing from it aborts the action and triggers rollback.
  void set_write_hook(std::function<void(std::size_t)> hook);

  std::vector<ToolAction> audit() const;
  void write_audit_ndjson(std::ostream& out) const;
  void set_audit_sink(std::function<void(const json&)> sink);

 private:
  std::vector<WriteOp> plan(const std::string& name, const Args& args, const StoreReader& reader) const;
  std::vector<std::size_t> lock_stripes(const json& args) const;

  store::ResourceStore& store_;
  const netsim::Simulator* sim_;
  const LogBuffer* logs_;
  std::function<void(std::size_t)> write_hook_;
  std::array<std::mutex, 64> stripes_;
  mutable std::mutex audit_mu_;
  std::vector<ToolAction> audit_;
  std::function<void(const json&)> audit_sink_;
  std::int64_t next_id_ = 1;
};

/// One expected effect of an intent.
///   exact:    {"kind", "name", "exists", "fields": {"spec.path": value}}
///   wildcard: {"kind", "count", "exists"[, "prefix"]}
struct Expectation {
  store::Kind kind = store::Kind::kNetwork;
  std::optional<std::string> name;
  std::string prefix;
  bool exists = true;
  std::optional<std::size_t> count;
  json fields = json::object();
};

Expectation expectation_from_json(const json& doc);
json to_json(const Expectation& e);

/// True iff `after` satisfies every expectation and nothing outside the
/// expected set changed between `before` and `after`.
bool check_action(const std::vector<Expectation>& expected, const store::SpecMap& before,
                  const store::SpecMap& after);

}  // namespace ranagent::tools
