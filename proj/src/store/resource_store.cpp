#include "ranagent/store/resource_store.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"
#include "ranagent/store/schema.hpp"

namespace ranagent::store {

namespace {

using detail::StoreCore;

std::optional<Resource> lookup(const StoreCore& core, const ResourceKey& key) {
  auto it = core.live.find(key);
  if (it == core.live.end()) return std::nullopt;
  return it->second;
}

std::vector<Resource> list_kind(const StoreCore& core, Kind kind) {
  std::vector<Resource> out;
  for (auto it = core.live.lower_bound({kind, ""}); it != core.live.end() && it->first.kind == kind; ++it)
    out.push_back(it->second);
  return out;
}

void check_references(const StoreCore& core, Kind kind, const json& spec) {
  for (const auto& ref : references_of(kind)) {
    auto f = spec.find(ref.field);
    if (f == spec.end() || f->is_null()) continue;
    std::vector<std::string> names;
    if (ref.is_list) {
      names = f->get<std::vector<std::string>>();
    } else {
      names.push_back(f->get<std::string>());
    }
    for (const auto& n : names) {
      if (!core.live.count({ref.target, n}))
        throw Error(ErrorCode::kIntegrity, "spec." + ref.field + ": references unknown " +
                                               std::string(to_string(ref.target)) + " '" + n + "'");
    }
  }
}

/// Direct dependents: live resources whose reference fields name `key`.
std::vector<ResourceKey> dependents_of(const StoreCore& core, const ResourceKey& key) {
  std::vector<ResourceKey> out;
  for (const auto& [k, r] : core.live) {
    for (const auto& target : referenced_keys(k.kind, r.spec)) {
      if (target == key) {
        out.push_back(k);
        break;
      }
    }
  }
  return out;
}

std::string access_network_of_policy(const StoreCore& core, const json& policy_spec) {
  auto slice = lookup(core, {Kind::kSlice, policy_spec.value("slice", "")});
  return slice ? slice->spec.value("access_network", "") : "";
}

void check_admission(const StoreCore& core, const std::string& access_network) {
  if (access_network.empty()) return;
  auto an = lookup(core, {Kind::kAccessNetwork, access_network});
  if (!an) return;
  double total = 0.0;
  for (const auto& p : list_kind(core, Kind::kPolicyJob)) {
    if (access_network_of_policy(core, p.spec) == access_network)
      total += p.spec.value("guaranteed_mbps", 0.0);
  }
  const double capacity = an->spec.value("cell_capacity_mbps", 0.0);
  if (total > capacity + 1e-9)
    throw Error(ErrorCode::kAdmission, "access network '" + access_network + "': guaranteed total " +
                                           format_number(total) + " Mbps exceeds capacity " +
                                           format_number(capacity) + " Mbps");
}

/// Access networks whose guarantee budget a write of (kind, spec) can touch.
std::set<std::string> admission_scope(const StoreCore& core, Kind kind, const json& spec) {
  std::set<std::string> out;
  switch (kind) {
    case Kind::kPolicyJob: out.insert(access_network_of_policy(core, spec)); break;
    case Kind::kSlice: out.insert(spec.value("access_network", "")); break;
    default: break;
  }
  return out;
}

void notify_after_write(StoreCore& core) {
  auto& subs = core.subscribers;
  subs.erase(std::remove_if(subs.begin(), subs.end(),
                            [](const auto& w) { return w.expired(); }),
             subs.end());
  for (const auto& w : subs) {
    auto s = w.lock();
    if (!s || s->cancelled) continue;
    if (core.version - s->position.load() > static_cast<std::int64_t>(s->buffer))
      s->overflowed = true;
  }
}

}  // namespace

// ---------------------------------------------------------------- Subscription

std::optional<Delta> Subscription::next_locked() {
  if (state_->cancelled) throw Error(ErrorCode::kOverflow, "watch subscription cancelled");
  if (state_->overflowed)
    throw Error(ErrorCode::kOverflow,
                "watch subscriber fell more than " + std::to_string(state_->buffer) +
                    " deltas behind and was cancelled; resync from a snapshot");
  const std::int64_t want = state_->position + 1;
  if (want > core_->version) return std::nullopt;
  if (want <= core_->base)
    throw Error(ErrorCode::kCompaction, "delta v" + std::to_string(want) +
                                            " was compacted; resync from a full snapshot");
  Delta d = core_->history[static_cast<std::size_t>(want - core_->base - 1)];
  state_->position = want;
  return d;
}

std::optional<Delta> Subscription::try_next() {
  std::shared_lock lock(core_->mu);
  return next_locked();
}

std::optional<Delta> Subscription::next(std::chrono::milliseconds timeout) {
  std::shared_lock lock(core_->mu);
  core_->cv.wait_for(lock, timeout, [&] {
    return state_->cancelled || core_->version > state_->position;
  });
  return next_locked();
}

std::vector<Delta> Subscription::drain() {
  std::shared_lock lock(core_->mu);
  std::vector<Delta> out;
  while (auto d = next_locked()) out.push_back(std::move(*d));
  return out;
}

void Subscription::cancel() {
  state_->cancelled = true;
  core_->cv.notify_all();
}

bool Subscription::cancelled() const { return state_->cancelled; }
std::int64_t Subscription::position() const { return state_->position; }

// ---------------------------------------------------------------- WriteSession

Delta WriteSession::commit(std::optional<Delta> delta, const std::optional<Resource>& next) {
  auto& core = core_;
  delta->version = ++core.version;
  const auto key = delta->key();
  if (next) {
    Resource r = *next;
    r.version = delta->version;
    core.live[key] = std::move(r);
  } else {
    core.live.erase(key);
  }
  core.history.push_back(*delta);
  while (core.history.size() > core.options.retention) {
    core.history.pop_front();
    ++core.base;
  }
  deltas_.push_back(*delta);
  return *delta;
}

UpsertResult WriteSession::upsert(Kind kind, const std::string& name, json spec) {
  if (!valid_identifier(name))
    throw Error(ErrorCode::kValidation, "name: '" + name + "' is not a valid identifier");
  validate_spec(kind, spec);
  check_references(core_, kind, spec);

  const ResourceKey key{kind, name};
  const auto before = lookup(core_, key);
  auto delta = diff_specs(kind, name,
                          before ? std::optional<json>(std::in_place, before->spec) : std::nullopt,
                          std::optional<json>(std::in_place, spec));
  if (!delta) return {core_.version, std::nullopt};

  // Stage, check guarantee budgets, and undo on rejection.
  Resource next{kind, name, std::move(spec), 0, false};
  std::set<std::string> scope = admission_scope(core_, kind, next.spec);
  if (before) {
    auto old_scope = admission_scope(core_, kind, before->spec);
    scope.insert(old_scope.begin(), old_scope.end());
  }
  if (kind == Kind::kAccessNetwork) scope.insert(name);
  core_.live[key] = next;
  try {
    for (const auto& an : scope) check_admission(core_, an);
  } catch (...) {
    if (before) {
      core_.live[key] = *before;
    } else {
      core_.live.erase(key);
    }
    throw;
  }
  return {commit(std::move(delta), next).version, deltas_.back()};
}

Delta WriteSession::remove(Kind kind, const std::string& name) {
  const ResourceKey key{kind, name};
  const auto before = lookup(core_, key);
  if (!before) throw Error(ErrorCode::kNotFound, key.str() + " not found");

  const auto direct = dependents_of(core_, key);
  if (!direct.empty()) {
    // Report the whole dependent closure so callers can plan the teardown.
    std::vector<std::string> names;
    std::set<ResourceKey> seen;
    std::vector<ResourceKey> frontier = direct;
    while (!frontier.empty()) {
      auto k = frontier.back();
      frontier.pop_back();
      if (!seen.insert(k).second) continue;
      names.push_back(k.str());
      for (const auto& d : dependents_of(core_, k)) frontier.push_back(d);
    }
    std::sort(names.begin(), names.end());
    throw Error(ErrorCode::kDependency, key.str() + " has live dependents: " + join(names, ", "));
  }
  auto delta = diff_specs(kind, name, std::optional<json>(std::in_place, before->spec), std::nullopt);
  return commit(std::move(delta), std::nullopt);
}

std::optional<Resource> WriteSession::find(Kind kind, const std::string& name) const {
  return lookup(core_, {kind, name});
}

std::vector<Resource> WriteSession::list(Kind kind) const { return list_kind(core_, kind); }

// ---------------------------------------------------------------- ResourceStore

ResourceStore::ResourceStore(StoreOptions options) : core_(std::make_shared<StoreCore>()) {
  core_->options = options;
}

void ResourceStore::transact(const std::function<void(WriteSession&)>& fn) {
  struct Finish {
    StoreCore& core;
    std::unique_lock<std::shared_mutex>& lock;
    ~Finish() {
      notify_after_write(core);
      lock.unlock();
      core.cv.notify_all();
    }
  };
  std::unique_lock lock(core_->mu);
  Finish finish{*core_, lock};
  WriteSession session(*core_);
  fn(session);
}

UpsertResult ResourceStore::upsert(Kind kind, const std::string& name, json spec) {
  UpsertResult result;
  transact([&](WriteSession& s) { result = s.upsert(kind, name, std::move(spec)); });
  return result;
}

Delta ResourceStore::remove(Kind kind, const std::string& name) {
  Delta result;
  transact([&](WriteSession& s) { result = s.remove(kind, name); });
  return result;
}

Resource ResourceStore::get(Kind kind, const std::string& name) const {
  auto r = find(kind, name);
  if (!r) throw Error(ErrorCode::kNotFound, ResourceKey{kind, name}.str() + " not found");
  return *r;
}

std::optional<Resource> ResourceStore::find(Kind kind, const std::string& name) const {
  std::shared_lock lock(core_->mu);
  return lookup(*core_, {kind, name});
}

std::vector<Resource> ResourceStore::list(Kind kind) const {
  std::shared_lock lock(core_->mu);
  return list_kind(*core_, kind);
}

std::vector<Resource> ResourceStore::list_all() const {
  std::shared_lock lock(core_->mu);
  std::vector<Resource> out;
  for (const auto& [_, r] : core_->live) out.push_back(r);
  return out;
}

std::int64_t ResourceStore::version() const {
  std::shared_lock lock(core_->mu);
  return core_->version;
}

Subscription ResourceStore::watch(WatchCursor cursor) {
  return watch(cursor, core_->options.subscriber_buffer);
}

Subscription ResourceStore::watch(WatchCursor cursor, std::size_t buffer) {
  std::unique_lock lock(core_->mu);
  if (cursor.from_version < 0 || cursor.from_version > core_->version)
    throw Error(ErrorCode::kValidation, "watch cursor " + std::to_string(cursor.from_version) +
                                            " outside [0, " + std::to_string(core_->version) + "]");
  if (cursor.from_version < core_->base)
    throw Error(ErrorCode::kCompaction, "watch cursor " + std::to_string(cursor.from_version) +
                                            " predates retained history (oldest v" +
                                            std::to_string(core_->base + 1) +
                                            "); resync from a full snapshot");
  auto state = std::make_shared<detail::SubscriberState>();
  state->position = cursor.from_version;
  state->buffer = buffer;
  if (core_->version - cursor.from_version > static_cast<std::int64_t>(buffer)) state->overflowed = true;
  core_->subscribers.push_back(state);
  return Subscription(core_, std::move(state));
}

std::pair<SpecMap, std::int64_t> ResourceStore::specs() const {
  std::shared_lock lock(core_->mu);
  SpecMap out;
  for (const auto& [k, r] : core_->live) out.emplace(k, r.spec);
  return {std::move(out), core_->version};
}

std::uint64_t ResourceStore::state_hash() const {
  return ranagent::content_hash(export_snapshot());
}

std::uint64_t ResourceStore::content_hash() const {
  json doc = json::object();
  for (const auto& [k, spec] : specs().first) doc[k.str()] = spec;
  return ranagent::content_hash(doc);
}

json ResourceStore::export_snapshot() const {
  std::shared_lock lock(core_->mu);
  json resources = json::object();
  for (const auto& [k, r] : core_->live)
    resources[std::string(to_string(k.kind))][k.name] = {{"spec", r.spec}, {"version", r.version}};
  return {{"version", core_->version}, {"resources", std::move(resources)}};
}

void ResourceStore::import_snapshot(const json& doc) {
  std::unique_lock lock(core_->mu);
  if (core_->version != 0 || !core_->live.empty())
    throw Error(ErrorCode::kValidation, "import_snapshot: store is not empty");
  std::map<ResourceKey, Resource> live;
  const auto version = doc.at("version").get<std::int64_t>();
  for (const auto& [kind_name, by_name] : doc.at("resources").items()) {
    const Kind kind = parse_kind(kind_name);
    for (const auto& [name, body] : by_name.items()) {
      validate_spec(kind, body.at("spec"));
      const auto v = body.at("version").get<std::int64_t>();
      if (v < 1 || v > version)
        throw Error(ErrorCode::kValidation, "import_snapshot: " + kind_name + "/" + name + " version out of range");
      live[{kind, name}] = Resource{kind, name, body.at("spec"), v, false};
    }
  }
  core_->live = std::move(live);
  core_->version = version;
  core_->base = version;
}

void ResourceStore::export_delta_log(std::ostream& out) const {
  std::shared_lock lock(core_->mu);
  for (const auto& d : core_->history) out << to_json(d).dump() << '\n';
}

std::vector<Delta> ResourceStore::history_since(std::int64_t from_version) const {
  std::shared_lock lock(core_->mu);
  if (from_version < core_->base)
    throw Error(ErrorCode::kCompaction, "history before v" + std::to_string(core_->base + 1) + " compacted");
  std::vector<Delta> out;
  for (const auto& d : core_->history)
    if (d.version > from_version) out.push_back(d);
  return out;
}

}  // namespace ranagent::store
