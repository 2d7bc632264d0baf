#include "ranagent/tools/log_buffer.hpp"

#include "ranagent/common/clock.hpp"

namespace ranagent::tools {

json to_json(const LogEntry& e) {
  return {{"seq", e.seq}, {"ts_ms", e.ts_ms}, {"level", e.level}, {"resource", e.resource}, {"message", e.message}};
}

void LogBuffer::append(std::string level, std::string resource, std::string message) {
  std::lock_guard lock(mu_);
  entries_.push_back({next_seq_++, utc_now_ms(), std::move(level), std::move(resource), std::move(message)});
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<LogEntry> LogBuffer::tail(const std::string& resource, std::size_t limit) const {
  auto matches = [&](const LogEntry& e) {
    if (resource.empty()) return true;
    if (e.resource == resource) return true;
    const auto slash = e.resource.find('/');
    return slash != std::string::npos && e.resource.compare(slash + 1, std::string::npos, resource) == 0;
  };
  std::lock_guard lock(mu_);
  std::vector<LogEntry> out;
  for (auto it = entries_.rbegin(); it != entries_.rend() && out.size() < limit; ++it)
    if (matches(*it)) out.push_back(*it);
  return {out.rbegin(), out.rend()};
}

}  // namespace ranagent::tools
