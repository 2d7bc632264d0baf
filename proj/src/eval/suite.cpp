#include "ranagent/eval/suite.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include "ranagent/common/error.hpp"

namespace ranagent::eval {

std::string_view to_string(Category c) { return c == Category::kControl ? "control" : "observability"; }

std::size_t Suite::count(Category c) const {
  return static_cast<std::size_t>(
      std::count_if(queries.begin(), queries.end(), [&](const EvalQuery& q) { return q.category == c; }));
}

Suite suite_from_json(const json& doc) {
  Suite s;
  s.name = doc.value("name", std::string("suite"));
  s.description = doc.value("description", std::string());
  std::set<std::string> ids;
  for (const auto& q : doc.at("queries")) {
    EvalQuery e;
    e.id = q.at("id").get<std::string>();
    if (!ids.insert(e.id).second) throw Error(ErrorCode::kValidation, "duplicate query id " + e.id);
    const auto cat = q.at("category").get<std::string>();
    if (cat == "control") e.category = Category::kControl;
    else if (cat != "observability") throw Error(ErrorCode::kValidation, e.id + ": unknown category " + cat);
    e.topic = q.value("topic", std::string());
    e.text = q.at("text").get<std::string>();
    if (e.category == Category::kObservability) {
      e.rubric = q.value("rubric", json::array());
      if (!e.rubric.is_array() || e.rubric.empty()) throw Error(ErrorCode::kValidation, e.id + ": empty rubric");
    } else {
      for (const auto& x : q.value("expectation", json::array())) e.expectation.push_back(tools::expectation_from_json(x));
      if (e.expectation.empty()) throw Error(ErrorCode::kValidation, e.id + ": control query without expectation");
      e.setup = q.value("setup", json::array());
    }
    s.queries.push_back(std::move(e));
  }
  return s;
}

Suite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot open suite " + path);
  const auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kValidation, path + ": not valid JSON");
  return suite_from_json(doc);
}

namespace {

QueryRow base_row(const EvalQuery& q, const agent::Episode& ep) {
  QueryRow row;
  row.id = q.id;
  row.category = q.category;
  row.text = q.text;
  row.answer = ep.answer;
  row.branch = std::string(agent::to_string(ep.branch));
  row.steps = static_cast<int>(ep.steps.size());
  row.e2e_ms = to_millis(ep.e2e_latency);
  const auto inf = ep.inference_times();
  if (!inf.empty()) {
    double sum = 0;
    for (auto d : inf) sum += to_millis(d);
    row.inference_ms_mean = sum / static_cast<double>(inf.size());
    row.inference_calls = static_cast<int>(inf.size());
  }
  if (ep.tta) row.tta_ms = to_millis(*ep.tta);
  row.failed = ep.failed;
  row.exhausted = ep.exhausted;
  row.error = ep.error;
  for (const auto& a : ep.actions) row.actions.push_back(tools::to_json(a));
  return row;
}

QueryRow run_control(const EvalQuery& q, agent::Backend& backend, const netsim::SimState& scenario,
                     const RunOptions& opt) {
  platform::Platform p(scenario);
  for (const auto& call : q.setup) {
    auto a = p.tools().call_deployment(call.at("tool").get<std::string>(), call.value("arguments", json::object()));
    if (!a.success)
      throw Error(ErrorCode::kValidation, q.id + ": setup call " + a.tool + " failed: " + a.error);
  }
  p.settle();
  const auto before = p.store().specs().first;
  auto ep = agent::run_episode(agent::make_prompt(q.text, q.id), backend, p, opt.answers, opt.agent);
  p.settle();
  const auto after = p.store().specs().first;
  auto row = base_row(q, ep);
  row.action_ok = !ep.failed && tools::check_action(q.expectation, before, after);
  return row;
}

QueryRow run_observability(const EvalQuery& q, agent::Backend& backend, platform::Platform& p, Judge& judge,
                           const RunOptions& opt) {
  auto ep = agent::run_episode(agent::make_prompt(q.text, q.id), backend, p, opt.answers, opt.agent);
  auto row = base_row(q, ep);
  try {
    row.facts = resolve_rubric(q.rubric, p);
    auto v = judge.score(q.text, ep.answer, row.facts);
    row.coherence = v.score;
    row.missing_facts = std::move(v.missing);
  } catch (const Error& e) {
    row.coherence = 0.0;
    if (row.error.empty()) row.error = std::string("judge: ") + e.what();
  }
  return row;
}

}  // namespace

EvalReport run_suite(const Suite& suite, agent::Backend& backend, const netsim::SimState& scenario,
                     const RunOptions& options) {
  RubricJudge rubric;
  Judge& judge = options.judge ? *options.judge : rubric;
  EvalReport report;
  report.backend = backend.profile().name;
  report.backend_metadata = backend.profile().metadata;
  report.judge = judge.name();
  report.judge_deterministic = judge.deterministic();

  std::vector<std::optional<QueryRow>> rows(suite.queries.size());
  auto emit = [&](std::size_t i) {
    if (options.on_row) options.on_row(*rows[i]);
  };

  // Observability queries share one running deployment.
  std::unique_ptr<platform::Platform> shared;
  bool first_obs = true;
  std::vector<std::size_t> controls;
  for (std::size_t i = 0; i < suite.queries.size(); ++i) {
    const auto& q = suite.queries[i];
    if (q.category == Category::kControl) {
      if (options.parallel) {
        controls.push_back(i);
        continue;
      }
      rows[i] = run_control(q, backend, scenario, options);
    } else {
      if (!shared) shared = std::make_unique<platform::Platform>(scenario);
      if (!first_obs && options.ticks_between > 0) shared->advance(options.ticks_between);
      first_obs = false;
      rows[i] = run_observability(q, backend, *shared, judge, options);
    }
    emit(i);
  }

  if (!controls.empty()) {
    std::atomic<std::size_t> next{0};
    const auto workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                         static_cast<unsigned>(controls.size())));
    std::vector<std::thread> pool;
    std::mutex err_mu;
    std::exception_ptr err;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < controls.size(); k = next++) {
          try {
            rows[controls[k]] = run_control(suite.queries[controls[k]], backend, scenario, options);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    for (auto i : controls) emit(i);
  }

  std::vector<double> coherence, e2e;
  double inf_total = 0;
  int inf_calls = 0;
  std::vector<bool> outcomes;
  double steps = 0;
  for (auto& r : rows) {
    auto& row = *r;
    if (row.coherence) coherence.push_back(*row.coherence);
    if (row.action_ok) {
      outcomes.push_back(*row.action_ok);
      if (!*row.action_ok) ++report.failed_controls;
    }
    if (row.tta_ms) report.tta_samples_ms.push_back(*row.tta_ms);
    if (row.inference_ms_mean) {
      inf_total += *row.inference_ms_mean * row.inference_calls;
      inf_calls += row.inference_calls;
    }
    if (row.failed) ++report.failed_queries;
    e2e.push_back(row.e2e_ms);
    steps += row.steps;
    report.steps_max = std::max(report.steps_max, row.steps);
    report.rows.push_back(std::move(row));
  }
  if (!coherence.empty()) {
    const auto s = summarize(coherence);
    report.coherence_mean = s.mean;
    report.coherence_std = s.std;
  }
  report.action_accuracy_pct = action_accuracy(outcomes);
  report.e2e_ms = summarize(e2e);
  if (inf_calls > 0) report.inference_ms_mean = inf_total / inf_calls;
  report.steps_mean = report.rows.empty() ? 0.0 : steps / static_cast<double>(report.rows.size());
  return report;
}

}  // namespace ranagent::eval
