#include "ranagent/index/context_index.hpp"

#include <algorithm>
#include <numeric>

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"
#include "ranagent/kernels/kernels.hpp"

namespace ranagent::index {

namespace {

std::string render_leaf(const json& v) {
  if (v.is_array() && !v.empty() && v[0].is_object()) {
    std::vector<std::string> items;
    for (const auto& obj : v) {
      std::vector<std::string> kv;
      for (const auto& [path, leaf] : flatten(obj)) kv.push_back(path + "=" + render_value(leaf));
      items.push_back(join(kv, " "));
    }
    return "[" + join(items, ", ") + "]";
  }
  if (v.is_array()) return "[" + render_value(v) + "]";
  if (v.is_object()) return "{}";
  return render_value(v);
}

}  // namespace

json to_json(const RetrievalHit& hit) {
  return {{"kind", store::to_string(hit.key.kind)},
          {"name", hit.key.name},
          {"score", hit.score},
          {"source_version", hit.source_version},
          {"text", hit.text}};
}

std::string render_doc_text(const DocKey& key, const json& spec, const std::string& last_change) {
  std::vector<std::string> pairs;
  if (!(spec.is_object() && spec.empty()))
    for (const auto& [path, leaf] : flatten(spec)) pairs.push_back(path + "=" + render_leaf(leaf));
  return std::string(store::to_string(key.kind)) + " " + key.name + ": " + join(pairs, " ") +
         "; last change: " + last_change;
}

ContextIndex::ContextIndex(IndexOptions options)
    : options_(options), published_(std::make_shared<Snapshot>()) {}

void ContextIndex::on_delta(const store::Delta& delta, const json* current_spec, bool publish_now) {
  {
    std::lock_guard lock(write_mu_);
    const DocKey key = delta.key();
    if (delta.op == store::DeltaOp::kDelete) {
      working_.erase(key);
    } else {
      if (delta.op == store::DeltaOp::kUpdate && delta.changed_fields.empty())
        throw Error(ErrorCode::kValidation, "update delta v" + std::to_string(delta.version) +
                                                " for " + key.str() + " carries no changed fields");
      if (!current_spec)
        throw Error(ErrorCode::kIntegrity, "no current state for " + key.str() + " at v" +
                                               std::to_string(delta.version) + "; resync required");
      const std::string change =
          delta.op == store::DeltaOp::kCreate ? "created" : store::summarize_changes(delta);
      ContextDoc doc{key, render_doc_text(key, *current_spec, change), {}, delta.version};
      doc.vector = embed(doc.text, options_.dim);
      working_[key] = std::move(doc);
    }
  }
  if (publish_now) publish();
}

void ContextIndex::publish() {
  auto snap = std::make_shared<Snapshot>();
  {
    std::lock_guard lock(write_mu_);
    snap->docs.reserve(working_.size());
    snap->matrix.reserve(working_.size() * options_.dim);
    for (const auto& [_, doc] : working_) {
      snap->docs.push_back(doc);
      snap->matrix.insert(snap->matrix.end(), doc.vector.begin(), doc.vector.end());
    }
  }
  std::lock_guard lock(read_mu_);
  published_ = std::move(snap);
}

void ContextIndex::reset(const std::vector<store::Resource>& resources) {
  std::vector<std::string> texts;
  std::vector<ContextDoc> docs;
  for (const auto& r : resources) {
    DocKey key{r.kind, r.name};
    docs.push_back({key, render_doc_text(key, r.spec, "resynced"), {}, r.version});
    texts.push_back(docs.back().text);
  }
  const auto matrix = texts.size() >= options_.parallel_threshold
                          ? embed_batch_parallel(texts, options_.dim)
                          : embed_batch_serial(texts, options_.dim);
  {
    std::lock_guard lock(write_mu_);
    working_.clear();
    for (std::size_t i = 0; i < docs.size(); ++i) {
      docs[i].vector.assign(matrix.begin() + i * options_.dim, matrix.begin() + (i + 1) * options_.dim);
      working_[docs[i].key] = std::move(docs[i]);
    }
  }
  publish();
}

std::shared_ptr<const ContextIndex::Snapshot> ContextIndex::snapshot() const {
  std::lock_guard lock(read_mu_);
  return published_;
}

std::vector<RetrievalHit> ContextIndex::query(std::string_view text, std::size_t k) const {
  if (k < 1) throw Error(ErrorCode::kValidation, "query: k must be >= 1");
  const auto snap = snapshot();
  const std::size_t n = snap->docs.size();
  if (n == 0) return {};
  const auto q = embed(text, options_.dim);
  std::vector<float> scores(n);
  if (n >= options_.parallel_threshold) {
    kernels::dot_scores_parallel(snap->matrix, options_.dim, q, scores);
  } else {
    kernels::dot_scores_serial(snap->matrix, options_.dim, q, scores);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, n);
  // Docs are key-sorted, so index order breaks score ties lexicographically.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  std::vector<RetrievalHit> hits;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& d = snap->docs[order[i]];
    hits.push_back({d.key, scores[order[i]], d.text, d.source_version});
  }
  return hits;
}

std::size_t ContextIndex::size() const { return snapshot()->docs.size(); }

std::vector<ContextDoc> ContextIndex::docs() const { return snapshot()->docs; }

std::optional<ContextDoc> ContextIndex::doc(const DocKey& key) const {
  const auto snap = snapshot();
  auto it = std::lower_bound(snap->docs.begin(), snap->docs.end(), key,
                             [](const ContextDoc& d, const DocKey& k) { return d.key < k; });
  if (it == snap->docs.end() || it->key != key) return std::nullopt;
  return *it;
}

json ContextIndex::dump() const {
  json out = json::array();
  for (const auto& d : snapshot()->docs)
    out.push_back({{"doc_key", {{"kind", store::to_string(d.key.kind)}, {"name", d.key.name}}},
                   {"text", d.text},
                   {"source_version", d.source_version}});
  return {{"dim", options_.dim}, {"docs", std::move(out)}};
}

void ContextIndex::load(const json& doc) {
  std::vector<std::string> texts;
  std::vector<ContextDoc> docs;
  for (const auto& d : doc.at("docs")) {
    DocKey key{store::parse_kind(d.at("doc_key").at("kind").get<std::string>()),
               d.at("doc_key").at("name").get<std::string>()};
    docs.push_back({key, d.at("text").get<std::string>(), {}, d.at("source_version").get<std::int64_t>()});
    texts.push_back(docs.back().text);
  }
  const auto matrix = texts.size() >= options_.parallel_threshold
                          ? embed_batch_parallel(texts, options_.dim)
                          : embed_batch_serial(texts, options_.dim);
  {
    std::lock_guard lock(write_mu_);
    working_.clear();
    for (std::size_t i = 0; i < docs.size(); ++i) {
      docs[i].vector.assign(matrix.begin() + i * options_.dim, matrix.begin() + (i + 1) * options_.dim);
      working_[docs[i].key] = std::move(docs[i]);
    }
  }
  publish();
}

// ---------------------------------------------------------------- ContextIndexer

ContextIndexer::ContextIndexer(store::ResourceStore& store, ContextIndex& index, LogSink log)
    : store_(store), index_(index), log_(std::move(log)) {
  resync("initial load");
  resyncs_ = 0;
}

std::size_t ContextIndexer::drain() {
  std::unique_lock lock(mu_);
  std::size_t applied = 0;
  try {
    for (const auto& delta : sub_->drain()) {
      store::fold(mirror_, delta);
      auto it = mirror_.find(delta.key());
      index_.on_delta(delta, it == mirror_.end() ? nullptr : &it->second, false);
      ++applied;
    }
  } catch (const Error& e) {
    lock.unlock();
    resync(e.what());
    return applied;
  }
  index_.publish();
  return applied;
}

void ContextIndexer::resync(const std::string& reason) {
  std::lock_guard lock(mu_);
  ++resyncs_;
  if (log_) log_("context index resync: " + reason);
  // Read listing and version under one lock so the new cursor matches.
  const auto snap = store_.export_snapshot();
  std::vector<store::Resource> resources;
  mirror_.clear();
  for (const auto& [kind_name, by_name] : snap.at("resources").items()) {
    const auto kind = store::parse_kind(kind_name);
    for (const auto& [name, body] : by_name.items()) {
      resources.push_back({kind, name, body.at("spec"), body.at("version").get<std::int64_t>(), false});
      mirror_[{kind, name}] = body.at("spec");
    }
  }
  index_.reset(resources);
  sub_.emplace(store_.watch({snap.at("version").get<std::int64_t>()}));
}

}  // namespace ranagent::index
