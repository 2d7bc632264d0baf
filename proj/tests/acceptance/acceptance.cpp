// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Run with a criterion name to run just that one.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "../support/random_ops.hpp"
#include "../support/test_backends.hpp"
#include "ranagent/agent/graph.hpp"
#include "ranagent/agent/scripted.hpp"
#include "ranagent/common/text.hpp"
#include "ranagent/eval/suite.hpp"
#include "ranagent/index/context_index.hpp"

using namespace ranagent;
using store::Kind;

namespace {

const std::string kData = RANAGENT_DATA_DIR;

// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    else if (!ok) failures.back() = "... and more";
  }
};

struct Criterion {
  std::string name;
  std::function<void(Check&)> run;
};

eval::Suite suite_only(eval::Category c) {
  auto s = eval::load_suite(kData + "/suite.json");
  std::erase_if(s.queries, [c](const eval::EvalQuery& q) { return q.category != c; });
  return s;
}

netsim::SimState scenario() { return netsim::load_scenario_file(kData + "/fixture.json"); }

std::unique_ptr<agent::ScriptedBackend> scripted() { return agent::ScriptedBackend::from_file(kData + "/rules.json"); }

std::vector<std::size_t> brute_frontier(const std::vector<eval::ParetoPoint>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
      dominated = pts[j].coherence >= pts[i].coherence && pts[j].latency_s <= pts[i].latency_s &&
                  (pts[j].coherence > pts[i].coherence || pts[j].latency_s < pts[i].latency_s);
    if (!dominated) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------- criteria

void action_accuracy(Check& c) {
  const auto suite = suite_only(eval::Category::kControl);
  auto backend = scripted();
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = eval::run_suite(suite, *backend, scenario());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int ok = 0;
  for (const auto& r : report.rows) {
    ok += r.action_ok.value_or(false) ? 1 : 0;
    c.expect(r.action_ok.value_or(false), r.id + " did not enact the expected change");
  }
  c.expect(suite.queries.size() == 10, "expected 10 control queries");
  c.expect(report.action_accuracy_pct == 100.0, "accuracy not 100%");
  c.expect(eval::render_table({report}).find("100 %") != std::string::npos, "table does not show 100 %");
  c.expect(secs < 10.0, "took " + std::to_string(secs) + " s");
  c.detail = std::to_string(ok) + "/" + std::to_string(report.rows.size()) + " in " + format_number(secs) + " s";
}

void failure_mode(Check& c) {
  const auto suite = suite_only(eval::Category::kControl);
  testing::SchemaBlindBackend blind;
  const auto report = eval::run_suite(suite, blind, scenario());
  c.expect(report.action_accuracy_pct == 0.0, "accuracy not 0%");
  std::size_t executed = 0;
  for (const auto& r : report.rows) executed += r.actions.size();
  c.expect(executed == 0, "schema-blind backend executed actions");

  // state hash before and after each episode, setup applied
  std::ifstream in(kData + "/suite.json");
  const auto doc = json::parse(in);
  int mutated = 0;
  for (const auto& q : doc["queries"]) {
    if (q["category"] != "control") continue;
    auto p = platform::Platform::from_file(kData + "/fixture.json");
    for (const auto& s : q.value("setup", json::array()))
      p->tools().call_deployment(s["tool"].get<std::string>(), s["arguments"]);
    p->settle();
    const auto before = p->store().state_hash();
    agent::run_episode(agent::make_prompt(q["text"].get<std::string>()), blind, *p, nullptr);
    mutated += p->store().state_hash() != before;
  }
  c.expect(mutated == 0, std::to_string(mutated) + " episodes changed the store");
  c.detail = "accuracy " + format_number(report.action_accuracy_pct.value_or(-1)) + "%, " +
             std::to_string(mutated) + " unintended mutations";
}

void step_budget(Check& c) {
  const auto suite = eval::load_suite(kData + "/suite.json");
  auto backend = scripted();
  const auto report = eval::run_suite(suite, *backend, scenario());
  for (const auto& r : report.rows) c.expect(r.steps <= 8, r.id + " took " + std::to_string(r.steps) + " steps");

  auto p = platform::Platform::from_file(kData + "/fixture.json");
  const auto before = p->store().content_hash();
  testing::RunawayBackend runaway;
  const auto ep = agent::run_episode(agent::make_prompt("keep creating terminals"), runaway, *p, nullptr);
  c.expect(ep.exhausted, "runaway episode not marked exhausted");
  c.expect(ep.steps.size() == 8, "runaway episode ran " + std::to_string(ep.steps.size()) + " steps");
  c.expect(p->store().content_hash() == before, "exhausted episode left changes behind");
  c.detail = "max " + std::to_string(report.steps_max) + " steps over " + std::to_string(report.rows.size()) +
             " episodes; runaway stopped at " + std::to_string(ep.steps.size());
}

void closed_loop(Check& c) {
  auto p = platform::Platform::from_file(kData + "/fixture.json");
  auto b = scripted();
  const std::string ask = "What are the max and guaranteed throughput in the PolicyJob CRD of VPN slice?";
  const std::string scope = "slice/bubbleran-vpn";
  auto run = [&](const std::string& text) { return agent::run_episode(agent::make_prompt(text), *b, *p, nullptr); };

  const auto first = run(ask);
  c.expect(first.answer.find("max 20 Mbps") != std::string::npos, "initial answer: " + first.answer);
  p->advance(1);
  const auto before = p->sim().latest(scope);
  c.expect(before && before->throughput_mbps == 20.0, "slice not at its 20 Mbps ceiling before the change");

  const auto act = run("Increase the bubbleran VPN slice maximum throughput to 30 Mbps.");
  c.expect(act.actions.size() == 1 && act.actions[0].success, "policy update not executed");
  const auto tick = p->sim().snapshot()->tick;
  p->advance(1);
  const auto series = p->sim().series(scope, tick + 1, tick + 1);
  c.expect(series.size() == 1 && series[0].throughput_mbps == 30.0, "KPI ceiling did not move to 30 on the next tick");

  const auto again = run(ask);
  c.expect(again.answer.find("30") != std::string::npos, "follow-up answer lacks 30: " + again.answer);
  c.detail = "\"" + again.answer + "\"";
}

void freshness(Check& c) {
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    store::ResourceStore s;
    index::ContextIndex idx;
    index::ContextIndexer indexer(s, idx);
    testing::RandomOps ops(seed * 7919);
    std::uniform_int_distribution<int> len(10, 120);
    const int n = len(ops.rng());
    for (int i = 0; i < n; ++i) {
      ops.step(s);
      if (i % 17 == 0) indexer.drain();
    }
    indexer.drain();
    const auto live = s.list_all();
    const auto docs = idx.docs();
    if (docs.size() != live.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < live.size(); ++i)
      mismatches += !(docs[i].key == store::ResourceKey{live[i].kind, live[i].name}) ||
                    docs[i].source_version != live[i].version;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");
  c.detail = "200 sequences, " + std::to_string(mismatches) + " mismatches";
}

void pareto(Check& c) {
  const auto pts = eval::reference_points(eval::load_reference(kData + "/published_backends.json"));
  std::vector<std::string> got;
  for (const auto& p : eval::pareto_frontier(pts)) got.push_back(p.label);
  const std::vector<std::string> want = {"GPT-4.1", "GPT-4.1-mini", "llama3.1:8b-q4", "llama3.2:3b-q4"};
  c.expect(pts.size() == 7, "expected 7 published points");
  c.expect(got == want, "frontier " + json(got).dump());
  std::vector<std::string> oracle;
  for (auto i : brute_frontier(pts)) oracle.push_back(pts[i].label);
  c.expect(got == oracle, "frontier disagrees with the pairwise oracle");

  std::mt19937_64 rng(11);
  int discrepancies = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> len(1, 60), coh(0, 10), lat(1, 30);
    std::vector<eval::ParetoPoint> set(static_cast<std::size_t>(len(rng)));
    for (std::size_t i = 0; i < set.size(); ++i) set[i] = {"p" + std::to_string(i), coh(rng) * 0.5, lat(rng) * 0.5, "local", std::nullopt};
    const auto mask = eval::pareto_mask(set);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) idx.push_back(i);
    discrepancies += idx != brute_frontier(set);
  }
  c.expect(discrepancies == 0, std::to_string(discrepancies) + " random sets disagree");
  c.detail = json(got).dump() + "; 1000 random sets, " + std::to_string(discrepancies) + " discrepancies";
}

void cdf(Check& c) {
  std::mt19937_64 rng(13);
  int discrepancies = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> len(1, 50), val(0, 20);
    std::vector<double> samples(static_cast<std::size_t>(len(rng)));
    for (auto& s : samples) s = val(rng) * 0.25;
    const auto curve = eval::tta_cdf(samples);
    bool ok = std::is_sorted(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.t < b.t; });
    for (double t = -0.5; t <= 5.5 && ok; t += 0.125) {
      std::size_t n = 0;
      for (double s : samples) n += s <= t;
      ok = std::abs(eval::cdf_at(curve, t) - static_cast<double>(n) / static_cast<double>(samples.size())) < 1e-12;
    }
    discrepancies += !ok;
  }
  c.expect(discrepancies == 0, std::to_string(discrepancies) + " sample sets disagree");

  const auto report = eval::run_suite(suite_only(eval::Category::kControl), *scripted(), scenario());
  std::vector<double> tta;
  for (double ms : report.tta_samples_ms) tta.push_back(ms / 1000.0);
  auto series = eval::load_tta_baseline(kData + "/human_tta_baseline.csv");
  series.insert(series.begin(), {"agent:scripted", tta});
  const auto csv = eval::cdf_csv(series);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  c.expect(line == "series,t_s,F", "unexpected CSV header " + line);
  std::set<std::string> names;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    names.insert(line.substr(0, line.find(',')));
  }
  c.expect(tta.size() == 10, "expected 10 agent time-to-action samples");
  c.expect(names.size() == 3 && names.count("agent:scripted"), "CSV series " + json(names).dump());
  c.detail = "1000 sets, " + std::to_string(discrepancies) + " discrepancies; CSV " + std::to_string(rows) +
             " rows over " + std::to_string(names.size()) + " series";
}

void latency(Check& c) {
  auto suite = eval::load_suite(kData + "/suite.json");
  // two observability and one control query keep the run short
  std::vector<eval::EvalQuery> picked = {suite.queries[0], suite.queries[1]};
  for (const auto& q : suite.queries)
    if (q.category == eval::Category::kControl) {
      picked.push_back(q);
      break;
    }
  suite.queries = picked;
  auto inner = scripted();
  testing::DelayedBackend slow(*inner, std::chrono::milliseconds(100));
  const auto report = eval::run_suite(suite, slow, scenario());
  double sum = 0;
  int calls = 0;
  for (const auto& r : report.rows) {
    c.expect(r.inference_ms_mean.has_value(), r.id + " has no inference time");
    c.expect(r.e2e_ms >= 100.0 * r.inference_calls, r.id + " E2E shorter than its backend time");
    c.expect(r.steps > 0, r.id + " has no steps");
    sum += r.inference_ms_mean.value_or(0) * r.inference_calls;
    calls += r.inference_calls;
  }
  const double mean = calls ? sum / calls : 0.0;
  c.expect(mean >= 100.0 && mean <= 150.0, "mean backend time " + format_number(mean) + " ms");
  const auto j = eval::to_json(report);
  c.expect(j.contains("e2e_latency_ms") && j.contains("inference_ms_mean") && j.contains("steps_mean"),
           "report lacks latency fields");
  c.detail = "mean backend time " + format_number(mean) + " ms over " + std::to_string(calls) + " calls, E2E mean " +
             format_number(report.e2e_ms.mean) + " ms";
}

void store_semantics(Check& c) {
  int fold_violations = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    store::ResourceStore s;
    testing::RandomOps ops(seed + 1000);
    for (int i = 0; i < 50; ++i) ops.step(s);
    store::SpecMap folded;
    std::int64_t expect = 1;
    bool ok = true;
    for (const auto& d : s.history_since(0)) {
      ok &= d.version == expect++;
      store::fold(folded, d);
    }
    ok &= folded == s.specs().first;
    fold_violations += !ok;
  }
  c.expect(fold_violations == 0, std::to_string(fold_violations) + " fold violations");

  store::ResourceStore s;
  auto a = s.watch({0});
  auto b = s.watch({0});
  constexpr std::size_t kDeltas = 400;
  std::vector<store::Delta> seen_a, seen_b;
  auto consume = [](store::Subscription& sub, std::vector<store::Delta>& out) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
    while (out.size() < kDeltas && std::chrono::steady_clock::now() < deadline)
      if (auto d = sub.next(std::chrono::milliseconds(50))) out.push_back(*d);
  };
  std::thread ta(consume, std::ref(a), std::ref(seen_a));
  std::thread tb(consume, std::ref(b), std::ref(seen_b));
  testing::RandomOps ops(99);
  std::size_t committed = 0;
  while (committed < kDeltas) committed += ops.step(s) ? 1 : 0;
  ta.join();
  tb.join();
  const auto log = s.history_since(0);
  c.expect(seen_a == log && seen_b == log, "a subscriber missed, duplicated or reordered deltas");

  auto p = platform::Platform::from_file(kData + "/fixture.json");
  const auto h0 = p->store().state_hash();
  const std::vector<std::pair<std::string, json>> bad = {
      {"delete_terminal", {{"name", "plato"}}},
      {"create_terminal", {{"name", "socrates"}}},
      {"create_slice", {{"name", "big"}, {"access_network", "gnb1"}, {"guaranteed_mbps", 99}, {"max_mbps", 99}}},
      {"create_ric", {{"network", "nowhere"}}},
      {"deploy_network", {{"name", "agora"}}},
  };
  int noop_violations = 0;
  for (const auto& [tool, args] : bad) {
    const auto r = p->tools().call_deployment(tool, args);
    noop_violations += r.preflight_passed || r.executed || p->store().state_hash() != h0;
  }
  c.expect(noop_violations == 0, std::to_string(noop_violations) + " preflight failures changed the store");
  c.detail = "500 fold sequences, " + std::to_string(log.size()) + " deltas to 2 subscribers, " +
             std::to_string(bad.size()) + " preflight failures; " +
             std::to_string(fold_violations + noop_violations + (seen_a != log) + (seen_b != log)) + " violations";
}

void judge_determinism(Check& c) {
  const auto suite = suite_only(eval::Category::kObservability);
  auto backend = scripted();
  const auto sc = scenario();
  std::vector<double> first;
  double mean = 0;
  for (int run = 0; run < 10; ++run) {
    const auto report = eval::run_suite(suite, *backend, sc);
    std::vector<double> scores;
    for (const auto& r : report.rows) scores.push_back(r.coherence.value_or(-1));
    if (run == 0) {
      first = scores;
      mean = report.coherence_mean.value_or(0);
    }
    c.expect(scores == first, "run " + std::to_string(run) + " scored differently");
  }
  c.expect(first.size() == 40, "expected 40 observability queries");
  c.expect(mean >= 4.0, "mean coherence " + format_number(mean));
  c.detail = "10 runs x " + std::to_string(first.size()) + " queries identical, mean " + format_number(mean);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"action-accuracy", action_accuracy},
      {"failure-mode-parity", failure_mode},
      {"step-budget", step_budget},
      {"closed-loop", closed_loop},
      {"index-freshness", freshness},
      {"pareto-oracle", pareto},
      {"cdf-correctness", cdf},
      {"latency-measurement", latency},
      {"store-semantics", store_semantics},
      {"judge-determinism", judge_determinism},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0, ran = 0;
  for (const auto& cr : criteria) {
    if (!only.empty() && cr.name != only) continue;
    ++ran;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = c.failures.empty();
    failed += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << cr.name << " (" << format_number(secs) << " s)";
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << '\n';
    for (const auto& f : c.failures) std::cout << "     - " << f << '\n';
  }
  if (ran == 0) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
  return failed ? 1 : 0;
}
