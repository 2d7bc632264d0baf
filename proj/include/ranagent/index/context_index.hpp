#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"
#include "ranagent/index/embedding.hpp"
#include "ranagent/store/resource_store.hpp"

namespace ranagent::index {

using DocKey = store::ResourceKey;

struct ContextDoc {
  DocKey key;
  std::string text;
  std::vector<float> vector;
  std::int64_t source_version = 0;
};

struct RetrievalHit {
  DocKey key;
  float score = 0.0f;
  std::string text;
  std::int64_t source_version = 0;
};

json to_json(const RetrievalHit& hit);

/// "<kind> <name>: k=v k=v; last change: <summary>"
std::string render_doc_text(const DocKey& key, const json& spec, const std::string& last_change);

struct IndexOptions {
  std::size_t dim = kDefaultDim;
  std::size_t parallel_threshold = 2048;
};

/// Dense index with one doc per resource. Mutations go to a working set;
/// queries read the last published immutable snapshot.
class ContextIndex {
 public:
  explicit ContextIndex(IndexOptions options = {});

  /// Applies one watch delta. create/update need the resource's current spec
  /// (Error{kIntegrity} when absent, which callers treat as a resync
  /// trigger); an update without changed fields is a contract violation
  /// (Error{kValidation}).
  void on_delta(const store::Delta& delta, const json* current_spec, bool publish_now = true);
  void publish();

  /// Replaces the whole index from a store listing.
  void reset(const std::vector<store::Resource>& resources);

  /// Top-k by cosine score, ties by key. Requires k >= 1.
  std::vector<RetrievalHit> query(std::string_view text, std::size_t k) const;

  std::size_t size() const;
  std::vector<ContextDoc> docs() const;
  std::optional<ContextDoc> doc(const DocKey& key) const;

  /// {doc_key, text, source_version} per doc; vectors are recomputed on load.
  json dump() const;
  void load(const json& doc);

 private:
  struct Snapshot {
    std::vector<ContextDoc> docs;  // sorted by key
    std::vector<float> matrix;
  };

  std::shared_ptr<const Snapshot> snapshot() const;

  IndexOptions options_;
  std::mutex write_mu_;
  std::map<DocKey, ContextDoc> working_;
  mutable std::mutex read_mu_;
  std::shared_ptr<const Snapshot> published_;
};

/// The push path: follows the store's watch stream, keeps a folded mirror
/// of live specs and feeds every delta to the index.
class ContextIndexer {
 public:
  using LogSink = std::function<void(const std::string&)>;

  ContextIndexer(store::ResourceStore& store, ContextIndex& index, LogSink log = {});

  /// Consumes every committed delta and publishes once. Returns the number
  /// of deltas applied. Falls back to a full resync on any stream error.
  std::size_t drain();
  void resync(const std::string& reason);
  std::size_t resync_count() const { return resyncs_; }

 private:
  store::ResourceStore& store_;
  ContextIndex& index_;
  LogSink log_;
  std::mutex mu_;
  std::optional<store::Subscription> sub_;
  store::SpecMap mirror_;
  std::size_t resyncs_ = 0;
};

}  // namespace ranagent::index
