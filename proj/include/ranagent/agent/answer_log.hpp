#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"

namespace ranagent::agent {

struct AnswerRecord {
  std::string id;
  std::int64_t ts_ms = 0;  ///< completion time, UTC
  std::string episode_id;
  std::string prompt;
  std::string backend;
  std::string branch;
  std::string answer;
  json actions = json::array();
  double e2e_latency_ms = 0.0;
  int steps = 0;
  bool failed = false;

  bool operator==(const AnswerRecord&) const = default;
};

json to_json(const AnswerRecord& r);
AnswerRecord answer_from_json(const json& doc);

/// Append-only answer log: NDJSON on disk (optional) plus an in-memory
/// time index. Completion timestamps never go backwards.
class AnswerLog {
 public:
  AnswerLog() = default;
  /// Opens or creates `path`, loading records already in it.
  explicit AnswerLog(const std::string& path);

  /// Assigns id and timestamp; throws Error{kPersistence} if the write fails.
  AnswerRecord append(AnswerRecord record);

  std::optional<AnswerRecord> get(const std::string& id) const;
  /// Records with from_ms <= ts_ms <= to_ms, in completion order.
  std::vector<AnswerRecord> range(std::int64_t from_ms, std::int64_t to_ms) const;
  std::vector<AnswerRecord> all() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::string path_;
  std::ofstream out_;
  std::vector<AnswerRecord> records_;
  std::int64_t next_id_ = 1;
};

}  // namespace ranagent::agent
