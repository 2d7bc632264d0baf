#include "ranagent/netsim/types.hpp"

#include "ranagent/common/error.hpp"

namespace ranagent::netsim {

std::string_view to_string(LinkStatus s) {
  switch (s) {
    case LinkStatus::kUp: return "up";
    case LinkStatus::kDegraded: return "degraded";
    case LinkStatus::kDown: return "down";
  }
  return "up";
}

std::string_view to_string(Profile p) { return p == Profile::kUrllc ? "urllc" : "embb"; }

LinkStatus parse_status(std::string_view s) {
  if (s == "up") return LinkStatus::kUp;
  if (s == "degraded") return LinkStatus::kDegraded;
  if (s == "down") return LinkStatus::kDown;
  throw Error(ErrorCode::kValidation, "status: expected up|degraded|down, got '" + std::string(s) + "'");
}

Profile parse_profile(std::string_view s) {
  if (s == "embb") return Profile::kEmbb;
  if (s == "urllc") return Profile::kUrllc;
  throw Error(ErrorCode::kValidation, "profile: expected embb|urllc, got '" + std::string(s) + "'");
}

int SimAccessNetwork::prb_total() const {
  int total = 0;
  for (const auto& c : cells) total += c.prb_total;
  return total;
}

double SimAccessNetwork::effective_capacity_mbps() const {
  switch (status) {
    case LinkStatus::kUp: return cell_capacity_mbps;
    case LinkStatus::kDegraded: return cell_capacity_mbps * 0.5;
    case LinkStatus::kDown: return 0.0;
  }
  return cell_capacity_mbps;
}

std::string KpiScope::key() const {
  return (kind == ScopeKind::kSlice ? "slice/" : "terminal/") + name;
}

}  // namespace ranagent::netsim
