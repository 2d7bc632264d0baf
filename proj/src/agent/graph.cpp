#include "ranagent/agent/graph.hpp"

#include <atomic>

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::agent {

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::kMonitoring: return "monitoring";
    case Branch::kDeployment: return "deployment";
    case Branch::kRetrieval: return "retrieval";
  }
  return "monitoring";
}

std::string_view to_string(Node n) {
  switch (n) {
    case Node::kRouting: return "routing";
    case Node::kRetrieve: return "retrieve";
    case Node::kMonitoring: return "monitoring";
    case Node::kDeployment: return "deployment";
    case Node::kValidate: return "validate";
    case Node::kSaveAnswer: return "save_answer";
  }
  return "routing";
}

std::optional<Branch> parse_branch(std::string_view s) {
  const auto v = to_lower(trim(s));
  if (v == "monitoring") return Branch::kMonitoring;
  if (v == "deployment") return Branch::kDeployment;
  if (v == "retrieval") return Branch::kRetrieval;
  return std::nullopt;
}

Prompt make_prompt(std::string text, std::string id) {
  static std::atomic<std::int64_t> counter{1};
  if (trim(text).empty()) throw Error(ErrorCode::kValidation, "prompt text must not be empty");
  Prompt p;
  p.arrival = SteadyClock::now();
  p.received_at_ms = utc_now_ms();
  p.text = std::move(text);
  p.id = id.empty() ? "ep-" + std::to_string(counter++) : std::move(id);
  return p;
}

json to_json(const Step& s) {
  json out = {{"index", s.index},
              {"node", to_string(s.node)},
              {"action", s.action},
              {"observation", s.observation},
              {"elapsed_ms", to_millis(s.elapsed)}};
  if (s.inference) out["inference_ms"] = to_millis(*s.inference);
  return out;
}

std::vector<Duration> Episode::inference_times() const {
  std::vector<Duration> out;
  for (const auto& s : steps)
    if (s.inference) out.push_back(*s.inference);
  return out;
}

json to_json(const Episode& e) {
  json steps = json::array(), actions = json::array(), reverted = json::array();
  for (const auto& s : e.steps) steps.push_back(to_json(s));
  for (const auto& a : e.actions) actions.push_back(tools::to_json(a));
  for (const auto& a : e.reverted) reverted.push_back(tools::to_json(a));
  const auto inf = e.inference_times();
  double inf_sum = 0;
  for (auto d : inf) inf_sum += to_millis(d);
  return {{"id", e.prompt.id},
          {"prompt", e.prompt.text},
          {"received_at_ms", e.prompt.received_at_ms},
          {"backend", e.backend},
          {"branch", to_string(e.branch)},
          {"steps", steps},
          {"answer", e.answer},
          {"actions", actions},
          {"reverted", reverted},
          {"e2e_latency_ms", to_millis(e.e2e_latency)},
          {"tta_ms", e.tta ? json(to_millis(*e.tta)) : json(nullptr)},
          {"inference_ms_mean", inf.empty() ? json(nullptr) : json(inf_sum / static_cast<double>(inf.size()))},
          {"stopped", e.stopped},
          {"exhausted", e.exhausted},
          {"failed", e.failed},
          {"error", e.error},
          {"record_id", e.record_id}};
}

std::string system_preamble() {
  return "You operate an Open RAN deployment through typed tools. Reply with exactly one JSON object: "
         "{\"branch\": \"monitoring\"|\"deployment\"|\"retrieval\"} when phase is route; otherwise "
         "{\"tool\": <name>, \"arguments\": {...}} to call a tool, or {\"answer\": <text>, \"stop\": true} "
         "to finish. Use only the listed tools and parameters. Quote facts only from context and tool outputs.";
}

json render_tools(Branch branch) {
  json out = json::array();
  for (const auto& s : tools::builtin_schemas())
    if (branch == Branch::kDeployment || s.kind == tools::ToolKind::kMonitoring) out.push_back(tools::to_json(s));
  return out;
}

namespace {

bool step_ok(const json& obs) {
  if (obs.contains("error")) return false;
  if (obs.contains("preflight") && !obs["preflight"].value("passed", false)) return false;
  if (obs.contains("result") && obs["result"].is_object() && !obs["result"].value("success", false)) return false;
  return true;
}

class Runner {
 public:
  Runner(const Prompt& prompt, Backend& backend, platform::Platform& platform, AnswerLog* log,
         const AgentOptions& options, const EventSink& events)
      : backend_(backend), platform_(platform), log_(log), opt_(options), events_(events) {
    ep_.prompt = prompt;
    ep_.backend = backend.profile().name;
  }

  Episode run() {
    emit({{"type", "episode_started"}, {"prompt", ep_.prompt.text}, {"backend", ep_.backend}});
    const int budget = std::max(opt_.step_budget, 2);
    try {
      route(budget);
      if (!ep_.failed && used_ < budget - 1) retrieve();
      if (!ep_.failed) loop(budget);
    } catch (const Error& e) {
      ep_.failed = true;
      ep_.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    if (!ep_.failed && !ep_.stopped) exhaust(budget);
    if (ep_.failed) ep_.answer = "Episode failed: " + ep_.error;
    save_answer();
    emit({{"type", "final_answer"},
          {"answer", ep_.answer},
          {"record_id", ep_.record_id},
          {"episode", to_json(ep_)}});
    return std::move(ep_);
  }

 private:
  void emit(json event) {
    if (!events_) return;
    event["episode_id"] = ep_.prompt.id;
    events_(event);
  }

  Step& add(Node node, json action, json observation, Duration elapsed, std::optional<Duration> inference = {}) {
    Step s;
    s.index = ++used_;
    s.node = node;
    s.action = std::move(action);
    s.observation = std::move(observation);
    s.elapsed = elapsed;
    s.inference = inference;
    ep_.steps.push_back(std::move(s));
    emit({{"type", "step"}, {"step", to_json(ep_.steps.back())}});
    return ep_.steps.back();
  }

  json transcript(const std::string& phase, const std::string& repair) const {
    json t = {{"system", system_preamble()}, {"phase", phase}, {"prompt", ep_.prompt.text}};
    if (phase == "route") {
      t["branches"] = {"monitoring", "deployment", "retrieval"};
    } else {
      t["branch"] = to_string(ep_.branch);
      t["context"] = hits_;
      t["tools"] = render_tools(ep_.branch);
    }
    json history = json::array(), summary = json::array();
    const std::size_t keep_from = ep_.steps.size() > opt_.keep_steps ? ep_.steps.size() - opt_.keep_steps : 0;
    for (std::size_t i = 0; i < ep_.steps.size(); ++i) {
      const auto& s = ep_.steps[i];
      json obs = s.node == Node::kRetrieve ? json{{"hits", hits_.size()}} : s.observation;
      if (i >= keep_from) {
        history.push_back({{"step", s.index}, {"node", to_string(s.node)}, {"action", s.action}, {"observation", obs}});
      } else {
        json entry = {{"step", s.index}, {"node", to_string(s.node)}, {"ok", step_ok(s.observation)}};
        if (s.action.is_object() && s.action.contains("tool")) entry["tool"] = s.action["tool"];
        if (s.node == Node::kDeployment && s.observation.contains("preflight")) entry["planned"] = true;
        summary.push_back(entry);
      }
    }
    t["history"] = history;
    t["summary"] = summary;
    t["remaining_steps"] = opt_.step_budget - used_;
    if (!repair.empty()) t["repair"] = repair;
    return t;
  }

  std::pair<std::string, Duration> ask(const json& t) {
    Stopwatch w;
    auto raw = backend_.complete(t);
    return {std::move(raw), w.elapsed()};
  }

  void route(int budget) {
    std::string repair;
    for (int attempt = 0; attempt < 2 && used_ < budget - 1; ++attempt) {
      Stopwatch w;
      auto [raw, inf] = ask(transcript("route", repair));
      auto turn = parse_turn(raw);
      std::optional<Branch> b;
      if (turn && turn->type == ModelTurn::Type::kRoute) b = parse_branch(turn->branch);
      if (b) {
        ep_.branch = *b;
        json obs = {{"branch", to_string(*b)}};
        if (*b == Branch::kRetrieval) obs["dispatched"] = "monitoring";
        add(Node::kRouting, {{"model", raw}}, obs, w.elapsed(), inf);
        return;
      }
      add(Node::kRouting, {{"model", raw}}, {{"error", "malformed"}, {"message", "expected {\"branch\": ...}"}},
          w.elapsed(), inf);
      repair = "Your previous output was not a valid routing decision. Reply with {\"branch\": \"monitoring\"} or "
               "{\"branch\": \"deployment\"}.";
    }
    ep_.failed = true;
    ep_.error = "backend produced no valid routing decision";
  }

  void retrieve() {
    Stopwatch w;
    hits_ = json::array();
    for (const auto& h : platform_.index().query(ep_.prompt.text, opt_.top_k)) {
      auto j = index::to_json(h);
      auto text = j["text"].get<std::string>();
      if (text.size() > opt_.hit_chars) j["text"] = text.substr(0, opt_.hit_chars);
      hits_.push_back(j);
    }
    add(Node::kRetrieve, {{"query", ep_.prompt.text}, {"k", opt_.top_k}}, {{"hits", hits_}}, w.elapsed());
  }

  void loop(int budget) {
    const Node node = ep_.branch == Branch::kDeployment ? Node::kDeployment : Node::kMonitoring;
    std::string repair;
    bool repaired_last = false;
    while (used_ < budget - 1) {
      Stopwatch w;
      auto [raw, inf] = ask(transcript("act", repair));
      repair.clear();
      auto turn = parse_turn(raw);
      if (!turn || turn->type == ModelTurn::Type::kRoute) {
        add(node, {{"model", raw}}, {{"error", "malformed"}, {"message", "expected a tool call or a final answer"}},
            w.elapsed(), inf);
        // One repair re-prompt; a second bad output in a row is a plain step failure.
        if (!repaired_last)
          repair = "Your previous output could not be parsed. Reply with one JSON object: a tool call or "
                   "{\"answer\": ..., \"stop\": true}.";
        repaired_last = !repaired_last;
        continue;
      }
      repaired_last = false;
      if (turn->type == ModelTurn::Type::kAnswer) {
        add(node, {{"answer", turn->answer}, {"stop", true}}, {{"stop", true}}, w.elapsed(), inf);
        ep_.answer = turn->answer;
        ep_.stopped = true;
        return;
      }
      const json call = {{"tool", turn->tool}, {"arguments", turn->arguments}};
      const auto* schema = tools::find_schema(turn->tool);
      if (schema && schema->kind == tools::ToolKind::kMonitoring) {
        json obs;
        try {
          obs = platform_.tools().call_monitoring(turn->tool, turn->arguments);
        } catch (const Error& e) {
          obs = {{"error", to_string(e.code())}, {"message", e.what()}};
        }
        add(node, call, obs, w.elapsed(), inf);
        continue;
      }
      if (ep_.branch != Branch::kDeployment) {
        add(node, call,
            {{"error", schema ? "tool-not-allowed" : "tool-not-found"},
             {"message", "'" + turn->tool + "' is not available on the " + std::string(to_string(ep_.branch)) +
                             " branch"}},
            w.elapsed(), inf);
        continue;
      }
      // Plan, then validate and execute.
      const auto reasons = platform_.tools().preflight(turn->tool, turn->arguments);
      json rs = json::array();
      for (const auto& r : reasons) {
        json row = {{"reason", tools::to_string(r.reason)}, {"message", r.message}};
        if (!r.parameter.empty()) row["parameter"] = r.parameter;
        rs.push_back(row);
      }
      add(Node::kDeployment, call, {{"preflight", {{"passed", reasons.empty()}, {"reasons", rs}}}}, w.elapsed(), inf);
      if (!reasons.empty()) continue;
      if (used_ >= budget - 1) break;

      Stopwatch v;
      auto action = platform_.tools().call_deployment(turn->tool, turn->arguments);
      if (action.executed) {
        if (!ep_.tta && action.exec_started) ep_.tta = *action.exec_started - ep_.prompt.arrival;
        ep_.actions.push_back(action);
      }
      platform_.settle();
      add(Node::kValidate, call, tools::to_json(action), v.elapsed());
    }
  }

  void exhaust(int budget) {
    ep_.exhausted = true;
    for (auto it = ep_.actions.rbegin(); it != ep_.actions.rend(); ++it) platform_.tools().revert(*it);
    if (!ep_.actions.empty()) platform_.settle();
    ep_.reverted = std::move(ep_.actions);
    ep_.actions.clear();
    ep_.answer = "Step budget of " + std::to_string(budget) + " exhausted before a final answer; " +
                 std::to_string(ep_.reverted.size()) + " executed action(s) rolled back.";
  }

  void save_answer() {
    Stopwatch w;
    AnswerRecord rec;
    rec.episode_id = ep_.prompt.id;
    rec.prompt = ep_.prompt.text;
    rec.backend = ep_.backend;
    rec.branch = std::string(to_string(ep_.branch));
    rec.answer = ep_.answer;
    for (const auto& a : ep_.actions) rec.actions.push_back({{"id", a.id}, {"tool", a.tool}, {"success", a.success}});
    rec.steps = used_ + 1;
    rec.failed = ep_.failed;
    json obs;
    if (log_) {
      try {
        rec.e2e_latency_ms = to_millis(SteadyClock::now() - ep_.prompt.arrival);
        ep_.record_id = log_->append(rec).id;
        obs = {{"record_id", ep_.record_id}};
      } catch (const Error& e) {
        ep_.persistence_error = e.what();
        obs = {{"error", "persistence"}, {"message", e.what()}};
      }
    } else {
      obs = {{"persisted", false}};
    }
    ep_.e2e_latency = SteadyClock::now() - ep_.prompt.arrival;
    add(Node::kSaveAnswer, {{"answer", ep_.answer}}, obs, w.elapsed());
  }

  Episode ep_;
  Backend& backend_;
  platform::Platform& platform_;
  AnswerLog* log_;
  AgentOptions opt_;
  const EventSink& events_;
  json hits_ = json::array();
  int used_ = 0;
};

}  // namespace

Episode run_episode(const Prompt& prompt, Backend& backend, platform::Platform& platform, AnswerLog* log,
                    const AgentOptions& options, const EventSink& events) {
  return Runner(prompt, backend, platform, log, options, events).run();
}

}  // namespace ranagent::agent
