#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <vector>

#include "ranagent/store/resource.hpp"

namespace ranagent::store {

struct StoreOptions {
  /// Deltas kept for watch replay; older cursors get a compaction error.
  std::size_t retention = std::numeric_limits<std::size_t>::max();
  /// Maximum unread backlog per subscriber before it is cancelled.
  std::size_t subscriber_buffer = 1 << 16;
};

struct WatchCursor {
  std::int64_t from_version = 0;
};

struct UpsertResult {
  std::int64_t version = 0;
  std::optional<Delta> delta;  ///< empty for a no-op upsert
};

namespace detail {

struct SubscriberState {
  std::atomic<std::int64_t> position{0};
  std::atomic<bool> overflowed{false};
  std::atomic<bool> cancelled{false};
  std::size_t buffer = 0;
};

struct StoreCore {
  mutable std::shared_mutex mu;
  std::condition_variable_any cv;
  std::map<ResourceKey, Resource> live;
  std::deque<Delta> history;   // versions base+1 .. version
  std::int64_t version = 0;
  std::int64_t base = 0;
  StoreOptions options;
  std::vector<std::weak_ptr<SubscriberState>> subscribers;
};

}  // namespace detail

/// Ordered, exactly-once delta stream for one consumer. Not safe for use by
/// several threads at once; open one subscription per consumer instead.
class Subscription {
 public:
  /// Next delta if one is committed. Throws Error{kOverflow} once the
  /// subscriber fell more than its buffer behind, Error{kCompaction} when the
  /// next delta is no longer retained.
  std::optional<Delta> try_next();
  std::optional<Delta> next(std::chrono::milliseconds timeout);
  /// Everything committed so far.
  std::vector<Delta> drain();
  void cancel();
  bool cancelled() const;
  std::int64_t position() const;

 private:
  friend class ResourceStore;
  Subscription(std::shared_ptr<detail::StoreCore> core,
               std::shared_ptr<detail::SubscriberState> state)
      : core_(std::move(core)), state_(std::move(state)) {}

  std::optional<Delta> next_locked();

  std::shared_ptr<detail::StoreCore> core_;
  std::shared_ptr<detail::SubscriberState> state_;
};

/// Write access handed out by ResourceStore::transact. All writes of one
/// session are invisible to readers until the session ends.
class WriteSession {
 public:
  UpsertResult upsert(Kind kind, const std::string& name, json spec);
  Delta remove(Kind kind, const std::string& name);

  std::optional<Resource> find(Kind kind, const std::string& name) const;
  std::vector<Resource> list(Kind kind) const;
  const std::vector<Delta>& deltas() const { return deltas_; }

 private:
  friend class ResourceStore;
  explicit WriteSession(detail::StoreCore& core) : core_(core) {}
  Delta commit(std::optional<Delta> delta, const std::optional<Resource>& next);

  detail::StoreCore& core_;
  std::vector<Delta> deltas_;
};

class ResourceStore {
 public:
  explicit ResourceStore(StoreOptions options = {});

  UpsertResult upsert(Kind kind, const std::string& name, json spec);
  Delta remove(Kind kind, const std::string& name);

  /// Runs `fn` with exclusive write access. Writes commit as they are made;
  /// readers and watchers observe them only after `fn` returns or throws.
  void transact(const std::function<void(WriteSession&)>& fn);

  Resource get(Kind kind, const std::string& name) const;
  std::optional<Resource> find(Kind kind, const std::string& name) const;
  std::vector<Resource> list(Kind kind) const;
  std::vector<Resource> list_all() const;
  std::int64_t version() const;

  Subscription watch(WatchCursor cursor);
  Subscription watch(WatchCursor cursor, std::size_t buffer);

  /// Live specs plus the version they reflect, read atomically.
  std::pair<SpecMap, std::int64_t> specs() const;
  std::uint64_t state_hash() const;    ///< specs, versions and store version
  std::uint64_t content_hash() const;  ///< specs only

  json export_snapshot() const;
  /// Loads a snapshot into an empty store; watch history starts after it.
  void import_snapshot(const json& doc);
  void export_delta_log(std::ostream& out) const;
  std::vector<Delta> history_since(std::int64_t from_version) const;

 private:
  std::shared_ptr<detail::StoreCore> core_;
};

}  // namespace ranagent::store
