#include "ranagent/agent/answer_log.hpp"

#include <algorithm>
#include <cstdio>

#include "ranagent/common/clock.hpp"
#include "ranagent/common/error.hpp"

namespace ranagent::agent {

json to_json(const AnswerRecord& r) {
  return {{"id", r.id},           {"ts_ms", r.ts_ms},   {"episode_id", r.episode_id},
          {"prompt", r.prompt},   {"backend", r.backend}, {"branch", r.branch},
          {"answer", r.answer},   {"actions", r.actions}, {"e2e_latency_ms", r.e2e_latency_ms},
          {"steps", r.steps},     {"failed", r.failed}};
}

AnswerRecord answer_from_json(const json& d) {
  AnswerRecord r;
  r.id = d.at("id").get<std::string>();
  r.ts_ms = d.at("ts_ms").get<std::int64_t>();
  r.episode_id = d.value("episode_id", std::string());
  r.prompt = d.at("prompt").get<std::string>();
  r.backend = d.value("backend", std::string());
  r.branch = d.value("branch", std::string());
  r.answer = d.at("answer").get<std::string>();
  r.actions = d.value("actions", json::array());
  r.e2e_latency_ms = d.value("e2e_latency_ms", 0.0);
  r.steps = d.value("steps", 0);
  r.failed = d.value("failed", false);
  return r;
}

namespace {

std::string record_id(std::int64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ans-%06lld", static_cast<long long>(n));
  return buf;
}

}  // namespace

AnswerLog::AnswerLog(const std::string& path) : path_(path) {
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      records_.push_back(answer_from_json(json::parse(line)));
    }
  }
  next_id_ = static_cast<std::int64_t>(records_.size()) + 1;
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorCode::kPersistence, "cannot open answer log " + path);
}

AnswerRecord AnswerLog::append(AnswerRecord record) {
  std::lock_guard lock(mu_);
  record.id = record_id(next_id_);
  record.ts_ms = std::max(utc_now_ms(), records_.empty() ? 0 : records_.back().ts_ms);
  if (!path_.empty()) {
    out_ << to_json(record).dump() << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::kPersistence, "write to answer log " + path_ + " failed");
  }
  ++next_id_;
  records_.push_back(record);
  return record;
}

std::optional<AnswerRecord> AnswerLog::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  for (const auto& r : records_)
    if (r.id == id) return r;
  return std::nullopt;
}

std::vector<AnswerRecord> AnswerLog::range(std::int64_t from_ms, std::int64_t to_ms) const {
  std::lock_guard lock(mu_);
  auto lo = std::lower_bound(records_.begin(), records_.end(), from_ms,
                             [](const AnswerRecord& r, std::int64_t t) { return r.ts_ms < t; });
  auto hi = std::upper_bound(records_.begin(), records_.end(), to_ms,
                             [](std::int64_t t, const AnswerRecord& r) { return t < r.ts_ms; });
  return lo < hi ? std::vector<AnswerRecord>(lo, hi) : std::vector<AnswerRecord>{};
}

std::vector<AnswerRecord> AnswerLog::all() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t AnswerLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace ranagent::agent
