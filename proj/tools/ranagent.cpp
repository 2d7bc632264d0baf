// ranagent: serve the gateway, run the evaluation suite, ask one-off
// questions, export artifacts.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "ranagent/common/error.hpp"
#include "ranagent/eval/suite.hpp"
#include "ranagent/gateway/gateway.hpp"

using namespace ranagent;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::atomic<bool> g_stop{false};

struct Common {
  std::string fixture = std::string(RANAGENT_DATA_DIR) + "/fixture.json";
  std::string rules = std::string(RANAGENT_DATA_DIR) + "/rules.json";
  std::string backends;
  std::string backend = "scripted";
};

void add_common(CLI::App* cmd, Common& c, bool with_backend = true) {
  cmd->add_option("--fixture", c.fixture, "Scenario fixture (JSON)");
  cmd->add_option("--rules", c.rules, "Rule table for the scripted backend");
  cmd->add_option("--backends", c.backends, "Backends file; overrides --rules");
  if (with_backend) cmd->add_option("--backend", c.backend, "Backend name");
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty() || !fs::exists(path)) throw Error(ErrorCode::kUsage, what + " not found: " + path);
}

std::unique_ptr<agent::Backend> pick_backend(const Common& c) {
  auto all = gateway::load_backends(c.backends, c.rules);
  auto it = all.find(c.backend);
  if (it == all.end()) {
    std::string names;
    for (const auto& [n, _] : all) names += (names.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::kUsage, "unknown backend '" + c.backend + "' (available: " + names + ")");
  }
  return std::move(it->second);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kPersistence, "cannot write " + path.string());
  out << content;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  Common common;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string answers;
  std::string audit;
  int tick_ms = 1000;
};

int run_serve(const ServeArgs& a) {
  require_file(a.common.fixture, "fixture");
  gateway::GatewayOptions opt;
  opt.fixture_path = a.common.fixture;
  opt.backends_path = a.common.backends;
  opt.rules_path = a.common.rules;
  opt.default_backend = a.common.backend;
  opt.answers_path = a.answers;
  opt.audit_path = a.audit;
  opt.tick_ms = a.tick_ms;
  auto gw = gateway::Gateway::from_options(opt);
  const int port = gw->start(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  gw->stop();
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string suite = std::string(RANAGENT_DATA_DIR) + "/suite.json";
  std::string out = "eval-out";
  bool gated = false;
  bool parallel = false;
  std::string baseline;
  std::string reference;
  std::string judge_endpoint;
  std::string judge_model = "gpt-4.1";
  std::string judge_key_env = "OPENAI_API_KEY";
  int step_budget = 8;
};

int run_eval(const EvalArgs& a) {
  require_file(a.common.fixture, "fixture");
  require_file(a.suite, "suite");
  if (!a.baseline.empty()) require_file(a.baseline, "baseline");
  if (!a.reference.empty()) require_file(a.reference, "reference");
  const auto suite = eval::load_suite(a.suite);
  const auto scenario = netsim::load_scenario_file(a.common.fixture);
  auto backend = pick_backend(a.common);

  eval::RunOptions opt;
  opt.agent.step_budget = a.step_budget;
  opt.parallel = a.parallel;
  std::unique_ptr<eval::Judge> judge;
  if (!a.judge_endpoint.empty()) {
    const char* key = std::getenv(a.judge_key_env.c_str());
    judge = std::make_unique<eval::ExternalJudge>(a.judge_endpoint, a.judge_model, key ? key : "");
    opt.judge = judge.get();
  }
  const fs::path out(a.out);
  fs::create_directories(out);
  agent::AnswerLog answers((out / "answers.ndjson").string());
  opt.answers = &answers;
  opt.on_row = [](const eval::QueryRow& r) {
    std::cerr << r.id << " " << (r.failed ? "FAILED " : "") << "steps=" << r.steps;
    if (r.coherence) std::cerr << " coherence=" << *r.coherence;
    if (r.action_ok) std::cerr << " action=" << (*r.action_ok ? "ok" : "wrong");
    std::cerr << '\n';
  };
  const auto report = eval::run_suite(suite, *backend, scenario, opt);

  write_file(out / "report.json", eval::to_json(report).dump(2) + "\n");
  std::string table = eval::render_table({report});
  std::vector<eval::ParetoPoint> points;
  if (!a.reference.empty()) {
    const auto ref = eval::load_reference(a.reference);
    table += "\nReference figures (" + fs::path(a.reference).filename().string() + "):\n" +
             eval::render_reference_table(ref);
    points = eval::reference_points(ref);
  }
  if (report.coherence_mean && report.e2e_ms.n > 0) {
    auto row = eval::to_reference(report);
    points.push_back({report.backend + " (measured)", *row.coherence_mean, std::max(*row.e2e_latency_s, 1e-6),
                      row.deployment, row.vram_gb});
  }
  write_file(out / "table.txt", table);
  write_file(out / "pareto.csv", eval::pareto_csv(points));

  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<double> tta_s;
  for (double ms : report.tta_samples_ms) tta_s.push_back(ms / 1000.0);
  series.push_back({"agent:" + report.backend, tta_s});
  if (!a.baseline.empty())
    for (auto& s : eval::load_tta_baseline(a.baseline)) series.push_back(std::move(s));
  write_file(out / "cdf.csv", eval::cdf_csv(series));

  std::cout << table;
  std::cout << "wrote " << (out / "report.json").string() << ", table.txt, pareto.csv, cdf.csv, answers.ndjson\n";
  if (a.gated && report.failed_controls > 0) {
    std::cerr << report.failed_controls << " control quer" << (report.failed_controls == 1 ? "y" : "ies")
              << " did not enact the expected change\n";
    return kExitFailure;
  }
  return 0;
}

// ---------------------------------------------------------------- query

struct QueryArgs {
  Common common;
  std::string text;
  bool as_json = false;
  int step_budget = 8;
};

int run_query(const QueryArgs& a) {
  require_file(a.common.fixture, "fixture");
  auto backend = pick_backend(a.common);
  auto p = platform::Platform::from_file(a.common.fixture);
  agent::AgentOptions opt;
  opt.step_budget = a.step_budget;
  const auto ep = agent::run_episode(agent::make_prompt(a.text), *backend, *p, nullptr, opt);
  if (a.as_json) std::cout << agent::to_json(ep).dump(2) << '\n';
  else std::cout << ep.answer << '\n';
  return ep.failed ? kExitFailure : 0;
}

// ---------------------------------------------------------------- export

struct ExportArgs {
  Common common;
  std::string what;
  std::string out;
  std::string prompt;
  std::string report;
};

int run_export(const ExportArgs& a) {
  std::string content;
  if (a.what == "report") {
    require_file(a.report, "report");
    std::ifstream in(a.report);
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::kUsage, a.report + ": not valid JSON");
    eval::ReferenceRow row;
    row.model = doc.value("backend", std::string("?"));
    auto num = [](const json* v) { return v && v->is_number() ? std::optional<double>(v->get<double>()) : std::nullopt; };
    row.coherence_mean = num(find_path(doc, "coherence.mean"));
    row.coherence_std = num(find_path(doc, "coherence.std"));
    row.action_accuracy_pct = num(find_path(doc, "action_accuracy_pct"));
    if (auto ms = num(find_path(doc, "e2e_latency_ms.mean"))) row.e2e_latency_s = *ms / 1000.0;
    row.inference_ms = num(find_path(doc, "inference_ms_mean"));
    row.steps = num(find_path(doc, "steps_mean"));
    row.vram_gb = num(find_path(doc, "backend_metadata.vram_gb"));
    row.deployment = doc.contains("backend_metadata") ? doc["backend_metadata"].value("deployment", std::string("local"))
                                                      : "local";
    content = eval::render_reference_table({row});
  } else {
    require_file(a.common.fixture, "fixture");
    auto p = platform::Platform::from_file(a.common.fixture);
    if (a.what == "index") {
      content = p->index().dump().dump(2) + "\n";
    } else if (a.what == "state") {
      content = p->store().export_snapshot().dump(2) + "\n";
    } else if (a.what == "catalog") {
      content = p->tools().catalog().dump(2) + "\n";
    } else if (a.what == "trace") {
      if (a.prompt.empty()) throw Error(ErrorCode::kUsage, "export trace needs --prompt");
      auto backend = pick_backend(a.common);
      const auto ep = agent::run_episode(agent::make_prompt(a.prompt), *backend, *p, nullptr);
      content = agent::to_json(ep).dump(2) + "\n";
    } else {
      throw Error(ErrorCode::kUsage, "unknown export kind '" + a.what + "'");
    }
  }
  if (a.out.empty() || a.out == "-") std::cout << content;
  else write_file(a.out, content);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open RAN operations agent: gateway, evaluation harness and tools"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Start the HTTP gateway on a scenario fixture");
  add_common(s, serve.common);
  s->add_option("--host", serve.host);
  s->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
  s->add_option("--answers", serve.answers, "Answer log (NDJSON); in memory when omitted");
  s->add_option("--audit", serve.audit, "Action audit log (NDJSON)");
  s->add_option("--tick-ms", serve.tick_ms, "Simulator tick period, 0 to disable")->check(CLI::NonNegativeNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Run the query suite against a backend and write a report");
  add_common(e, ev.common);
  e->add_option("--suite", ev.suite);
  e->add_option("--out", ev.out, "Output directory");
  e->add_flag("--gated", ev.gated, "Exit nonzero when any control query fails");
  e->add_flag("--parallel", ev.parallel, "Run control queries concurrently (timings not meaningful)");
  e->add_option("--baseline", ev.baseline, "TTA baseline CSV (group,tta_s) added to the CDF output");
  e->add_option("--reference", ev.reference, "Published per-backend figures for the table and Pareto output");
  e->add_option("--judge-endpoint", ev.judge_endpoint, "Chat endpoint for the external judge (non-deterministic)");
  e->add_option("--judge-model", ev.judge_model);
  e->add_option("--judge-key-env", ev.judge_key_env);
  e->add_option("--steps", ev.step_budget, "Step budget")->check(CLI::Range(2, 64));

  QueryArgs q;
  auto* qc = app.add_subcommand("query", "Answer one prompt and print the answer");
  add_common(qc, q.common);
  qc->add_option("text", q.text, "Prompt")->required();
  qc->add_flag("--json", q.as_json, "Print the full episode trace");
  qc->add_option("--steps", q.step_budget, "Step budget")->check(CLI::Range(2, 64));

  ExportArgs x;
  auto* xc = app.add_subcommand("export", "Write index, state, catalog, an episode trace or a report table");
  add_common(xc, x.common);
  xc->add_option("what", x.what, "index | state | catalog | trace | report")
      ->required()
      ->check(CLI::IsMember({"index", "state", "catalog", "trace", "report"}));
  xc->add_option("--out", x.out, "Output file, '-' for stdout");
  xc->add_option("--prompt", x.prompt, "Prompt for 'trace'");
  xc->add_option("--report", x.report, "report.json for 'report'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*s) return run_serve(serve);
    if (*e) return run_eval(ev);
    if (*qc) return run_query(q);
    if (*xc) return run_export(x);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return err.code() == ErrorCode::kUsage ? kExitUsage : kExitFailure;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
