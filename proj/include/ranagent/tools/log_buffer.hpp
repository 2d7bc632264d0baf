#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"

namespace ranagent::tools {

struct LogEntry {
  std::int64_t seq = 0;
  std::int64_t ts_ms = 0;
  std::string level;
  std::string resource;  ///< "Kind/name", or empty for platform-wide events
  std::string message;
};

json to_json(const LogEntry& entry);

/// Bounded in-memory event log served by the get_logs tool.
class LogBuffer {
 public:
  explicit LogBuffer(std::size_t capacity = 4096) : capacity_(capacity) {}

  void append(std::string level, std::string resource, std::string message);

  /// Newest `limit` entries, oldest first. `resource` matches "Kind/name"
  /// exactly or a bare name against any kind.
  std::vector<LogEntry> tail(const std::string& resource, std::size_t limit) const;

 private:
  mutable std::mutex mu_;
  std::deque<LogEntry> entries_;
  std::size_t capacity_;
  std::int64_t next_seq_ = 1;
};

}  // namespace ranagent::tools
