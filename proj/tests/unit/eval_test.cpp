#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "../support/test_backends.hpp"
#include "ranagent/agent/scripted.hpp"
#include "ranagent/common/error.hpp"
#include "ranagent/eval/suite.hpp"

using namespace ranagent;
using namespace ranagent::eval;

namespace {

const std::string kData = RANAGENT_DATA_DIR;

// F(t) by counting, straight from the definition.
double brute_cdf(const std::vector<double>& samples, double t) {
  std::size_t n = 0;
  for (double s : samples) n += s <= t ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(samples.size());
}

std::vector<std::size_t> brute_frontier(const std::vector<ParetoPoint>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      const bool ge = pts[j].coherence >= pts[i].coherence && pts[j].latency_s <= pts[i].latency_s;
      const bool strict = pts[j].coherence > pts[i].coherence || pts[j].latency_s < pts[i].latency_s;
      dominated = ge && strict;
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

std::vector<ParetoPoint> published_points() {
  return reference_points(load_reference(kData + "/published_backends.json"));
}

Fact num(double v) { return {"n", format_number(v), v}; }
Fact str(std::string s) { return {"s", std::move(s), std::nullopt}; }

}  // namespace

TEST_CASE("empirical CDF examples") {
  auto c = tta_cdf({1, 2, 3});
  REQUIRE(c.size() == 3);
  CHECK(cdf_at(c, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(cdf_at(c, 0.5) == 0.0);
  CHECK(cdf_at(c, 2.5) == doctest::Approx(2.0 / 3.0));
  CHECK(cdf_at(c, 3) == 1.0);
  auto one = tta_cdf({5});
  REQUIRE(one.size() == 1);
  CHECK(one[0].f == 1.0);
  CHECK(cdf_at(one, 5) == 1.0);
  auto dup = tta_cdf({4, 2, 2});
  REQUIRE(dup.size() == 2);
  CHECK(dup[0].t == 2.0);
  CHECK(dup[0].f == doctest::Approx(2.0 / 3.0));
  CHECK(dup[1].f == 1.0);
  CHECK(tta_cdf({}).empty());
  CHECK(cdf_at({}, 1.0) == 0.0);
}

TEST_CASE("empirical CDF matches counting on random samples") {
  std::mt19937_64 rng(11);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> len(1, 60), val(0, 40);
    std::vector<double> s(static_cast<std::size_t>(len(rng)));
    for (auto& x : s) x = val(rng) * 0.25;
    const auto curve = tta_cdf(s);
    double prev = 0;
    for (const auto& p : curve) {
      mismatches += p.f != brute_cdf(s, p.t);
      mismatches += p.f < prev || p.f > 1.0;
      prev = p.f;
    }
    mismatches += curve.back().f != 1.0;
    for (double t = -0.5; t < 11; t += 0.125) mismatches += cdf_at(curve, t) != brute_cdf(s, t);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("Pareto frontier of the published backends") {
  const auto pts = published_points();
  REQUIRE(pts.size() == 7);
  std::vector<std::string> labels;
  for (const auto& p : pareto_frontier(pts)) labels.push_back(p.label);
  CHECK(labels == std::vector<std::string>{"GPT-4.1", "GPT-4.1-mini", "llama3.1:8b-q4", "llama3.2:3b-q4"});
  std::vector<std::string> oracle;
  for (auto i : brute_frontier(pts)) oracle.push_back(pts[i].label);
  CHECK(labels == oracle);
}

TEST_CASE("Pareto edge cases") {
  const ParetoPoint a{"a", 3.0, 2.0, "local", std::nullopt};
  CHECK(pareto_frontier({a}).size() == 1);
  CHECK(pareto_frontier({a, a}).size() == 2);
  CHECK(pareto_frontier({}).empty());
  CHECK_THROWS_AS(pareto_frontier({{"x", 5.5, 1.0, "local", std::nullopt}}), Error);
  CHECK_THROWS_AS(pareto_frontier({{"x", 3.0, 0.0, "local", std::nullopt}}), Error);
  CHECK_THROWS_AS(pareto_frontier({{"x", -0.1, 1.0, "local", std::nullopt}}), Error);
}

TEST_CASE("Pareto frontier matches pairwise dominance on random sets") {
  std::mt19937_64 rng(5);
  int discrepancies = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> len(1, 40), coh(0, 10), lat(1, 20);
    std::vector<ParetoPoint> pts(static_cast<std::size_t>(len(rng)));
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {"p" + std::to_string(i), coh(rng) * 0.5, lat(rng) * 0.5, "local", std::nullopt};
    const auto mask = pareto_mask(pts);
    const auto oracle = brute_frontier(pts);
    std::vector<std::size_t> got;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) got.push_back(i);
    discrepancies += got != oracle;
  }
  CHECK(discrepancies == 0);

  // large enough for the parallel kernel
  std::vector<ParetoPoint> big(5000);
  std::uniform_real_distribution<double> c(0, 5), l(0.1, 20);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = {"p" + std::to_string(i), c(rng), l(rng), "local", std::nullopt};
  const auto mask = pareto_mask(big);
  std::vector<std::size_t> got;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) got.push_back(i);
  CHECK(got == brute_frontier(big));
}

TEST_CASE("action accuracy") {
  CHECK(*action_accuracy(std::vector<bool>(10, true)) == 100.0);
  CHECK(*action_accuracy(std::vector<bool>(10, false)) == 0.0);
  std::vector<bool> half(10, false);
  std::fill(half.begin(), half.begin() + 5, true);
  CHECK(*action_accuracy(half) == 50.0);
  CHECK_FALSE(action_accuracy({}));
}

TEST_CASE("summary statistics") {
  // mean 2.5, sample variance 5/3, p95 at position 2.85 between 3 and 4
  auto s = summarize({4, 1, 3, 2});
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.std == doctest::Approx(1.2909944487));
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.p95 == doctest::Approx(3.85));
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  auto one = summarize({7});
  CHECK(one.std == 0.0);
  CHECK(one.p95 == 7.0);
  CHECK(summarize({}).n == 0);
  CHECK(to_json(summarize({}))["mean"].is_null());
}

TEST_CASE("coherence judge formula") {
  const std::vector<Fact> four = {num(3), str("gnb1"), str("up"), num(2.98)};
  CHECK(coherence_judge("3 UEs on gnb1, status up, latency 2.98 ms", four) == 5.0);
  CHECK(coherence_judge("nothing relevant here", four) == 0.0);
  CHECK(coherence_judge("3 UEs on gnb1", four) == 2.5);
  CHECK(coherence_judge("", four) == 0.0);
  CHECK(coherence_judge("   ", four) == 0.0);
  CHECK(coherence_judge("anything", {}) == 0.0);
}

TEST_CASE("fact matching boundaries") {
  CHECK_FALSE(fact_matches("attached to gnb1", num(1)));
  CHECK_FALSE(fact_matches("log: v7 created", num(7)));
  CHECK_FALSE(fact_matches("bubbleran-ric-2", num(2)));
  CHECK(fact_matches("(3 resources created)", num(3)));
  CHECK(fact_matches("latency 2.98 ms", num(2.981)));
  CHECK(fact_matches("3619.2 MHz", num(3619.2)));
  CHECK_FALSE(fact_matches("latency 2.97 ms", num(2.981)));
  CHECK(fact_matches("Working: yes.", str("yes")));
  CHECK_FALSE(fact_matches("yesterday", str("yes")));
  CHECK(fact_matches("log: v7 created", str("v7")));
  CHECK_FALSE(fact_matches("v17", str("v7")));
  CHECK(fact_matches("Slices: BUBBLERAN-VPN", str("bubbleran-vpn")));
  CHECK_FALSE(fact_matches("bubbleran-vpn2", str("bubbleran-vpn")));
}

TEST_CASE("rubric resolution against the fixture") {
  auto p = platform::Platform::from_file(kData + "/fixture.json");
  auto facts = resolve_rubric(json::parse(R"([
      {"count": {"kind": "Terminal"}},
      {"names": {"kind": "Terminal", "where": {"field": "profile", "equals": "embb"}}},
      {"names": {"kind": "Slice", "where": {"field": "members", "contains": "hypatia"}}},
      {"field": {"kind": "AccessNetwork", "name": "gnb2", "path": "cells", "pluck": "prb_total"}},
      {"field": {"kind": "Network", "name": "bubbleran", "path": "core_present"}},
      {"field": {"kind": "PolicyJob", "name": "bubbleran-vpn", "path": "$version"}},
      {"kpi": {"scope": "slice/bubbleran-vpn", "metric": "throughput_mbps", "window": 3}},
      {"log": {"resource": "Terminal/hypatia"}},
      {"literal": "created"}
  ])"),
                              *p);
  std::vector<std::string> expected;
  for (const auto& f : facts) expected.push_back(f.expected);
  CHECK(expected == std::vector<std::string>{"3", "aristotle", "socrates", "bubbleran-urllc", "51", "51", "yes",
                                             "v" + std::to_string(p->store().find(store::Kind::kPolicyJob, "bubbleran-vpn")->version),
                                             "20", facts[9].expected, "created"});
  CHECK(facts[0].number == 3.0);
  CHECK(facts[9].expected.find("created") != std::string::npos);

  CHECK_THROWS_AS(resolve_rubric(json::parse(R"([{"bogus": 1}])"), *p), Error);
  CHECK_THROWS_AS(resolve_rubric(json::parse(R"([{"field": {"kind": "Terminal", "name": "nobody", "path": "profile"}}])"), *p),
                  Error);
  CHECK_THROWS_AS(resolve_rubric(json::parse(R"([{"kpi": {"scope": "slice/none", "metric": "latency_ms"}}])"), *p), Error);
}

TEST_CASE("suite file shape") {
  auto suite = load_suite(kData + "/suite.json");
  CHECK(suite.queries.size() == 50);
  CHECK(suite.count(Category::kObservability) == 40);
  CHECK(suite.count(Category::kControl) == 10);
  std::set<std::string> topics;
  for (const auto& q : suite.queries)
    if (q.category == Category::kObservability) topics.insert(q.topic);
  for (const char* t : {"kpis", "policies", "slices", "crds", "logs"}) CHECK(topics.count(t) == 1);

  CHECK_THROWS_AS(load_suite("/nonexistent/suite.json"), Error);
  CHECK_THROWS_AS(suite_from_json(json::parse(
                      R"({"queries": [{"id": "a", "category": "observability", "text": "x", "rubric": [{"literal": "y"}]},
                                      {"id": "a", "category": "observability", "text": "x", "rubric": [{"literal": "y"}]}]})")),
                  Error);
  CHECK_THROWS_AS(suite_from_json(json::parse(R"({"queries": [{"id": "a", "category": "observability", "text": "x"}]})")),
                  Error);
  CHECK_THROWS_AS(suite_from_json(json::parse(R"({"queries": [{"id": "a", "category": "control", "text": "x"}]})")),
                  Error);
  CHECK_THROWS_AS(suite_from_json(json::parse(R"({"queries": [{"id": "a", "category": "other", "text": "x"}]})")),
                  Error);
}

TEST_CASE("scripted backend on the full suite") {
  const auto suite = load_suite(kData + "/suite.json");
  const auto scenario = netsim::load_scenario_file(kData + "/fixture.json");
  auto backend = agent::ScriptedBackend::from_file(kData + "/rules.json");
  std::vector<std::string> streamed;
  RunOptions opt;
  opt.on_row = [&](const QueryRow& r) { streamed.push_back(r.id); };
  const auto report = run_suite(suite, *backend, scenario, opt);

  REQUIRE(report.rows.size() == 50);
  CHECK(streamed.size() == 50);
  REQUIRE(report.action_accuracy_pct);
  CHECK(*report.action_accuracy_pct == 100.0);
  CHECK(report.failed_controls == 0);
  CHECK(report.failed_queries == 0);
  CHECK(report.steps_max <= 8);
  CHECK(report.steps_mean <= 8.0);
  REQUIRE(report.coherence_mean);
  CHECK(*report.coherence_mean >= 4.0);
  CHECK(report.tta_samples_ms.size() == 10);
  for (const auto& r : report.rows) {
    CAPTURE(r.id);
    // coherence and accuracy rows are disjoint and cover the suite
    CHECK(r.coherence.has_value() != r.action_ok.has_value());
    CHECK(r.coherence.has_value() == (r.category == Category::kObservability));
    if (r.coherence) {
      INFO(r.answer);
      INFO(json(r.missing_facts).dump());
      CHECK(*r.coherence == 5.0);
    }
  }
  const auto j = to_json(report);
  CHECK(j["queries"]["observability"] == 40);
  CHECK(j["queries"]["control"] == 10);
  CHECK(j["judge"]["deterministic"] == true);

  const auto table = render_table({report});
  CHECK(table.find("Observe Coherence") != std::string::npos);
  CHECK(table.find("100 %") != std::string::npos);
  CHECK(table.find("5.0 ± 0.0") != std::string::npos);
}

TEST_CASE("parallel control mode gives the same outcomes") {
  auto suite = load_suite(kData + "/suite.json");
  std::erase_if(suite.queries, [](const EvalQuery& q) { return q.category != Category::kControl; });
  const auto scenario = netsim::load_scenario_file(kData + "/fixture.json");
  auto backend = agent::ScriptedBackend::from_file(kData + "/rules.json");
  RunOptions opt;
  opt.parallel = true;
  const auto report = run_suite(suite, *backend, scenario, opt);
  REQUIRE(report.rows.size() == 10);
  CHECK(*report.action_accuracy_pct == 100.0);
  CHECK_FALSE(report.coherence_mean);
  for (std::size_t i = 0; i < suite.queries.size(); ++i) CHECK(report.rows[i].id == suite.queries[i].id);
}

TEST_CASE("empty suite") {
  Suite empty;
  auto backend = agent::ScriptedBackend::from_file(kData + "/rules.json");
  const auto report = run_suite(empty, *backend, netsim::load_scenario_file(kData + "/fixture.json"));
  CHECK(report.rows.empty());
  CHECK_FALSE(report.action_accuracy_pct);
  CHECK_FALSE(report.coherence_mean);
  CHECK(report.steps_mean == 0.0);
  const auto j = to_json(report);
  CHECK(j["action_accuracy_pct"].is_null());
  CHECK(render_table({report}).find(" - ") != std::string::npos);
}

TEST_CASE("schema-blind backend scores zero accuracy") {
  auto suite = load_suite(kData + "/suite.json");
  testing::SchemaBlindBackend blind;
  const auto report = run_suite(suite, blind, netsim::load_scenario_file(kData + "/fixture.json"));
  REQUIRE(report.action_accuracy_pct);
  CHECK(*report.action_accuracy_pct == 0.0);
  CHECK(report.failed_controls == 10);
  for (const auto& r : report.rows) {
    CHECK(r.actions.empty());
    CHECK(r.steps <= 8);
  }
}

TEST_CASE("unreachable backend marks queries failed and the run completes") {
  auto backend = agent::make_backend({{"name", "down"}, {"kind", "http-chat"},
                                      {"endpoint", "http://127.0.0.1:9/v1/chat/completions"}, {"timeout_ms", 300}});
  auto suite = load_suite(kData + "/suite.json");
  suite.queries.resize(3);
  suite.queries.push_back(load_suite(kData + "/suite.json").queries.back());
  const auto report = run_suite(suite, *backend, netsim::load_scenario_file(kData + "/fixture.json"));
  CHECK(report.rows.size() == 4);
  CHECK(report.failed_queries == 4);
  CHECK(*report.action_accuracy_pct == 0.0);
  for (const auto& r : report.rows) CHECK(r.steps == 1);
}

TEST_CASE("judge determinism across repeated runs") {
  auto suite = load_suite(kData + "/suite.json");
  std::erase_if(suite.queries, [](const EvalQuery& q) { return q.category != Category::kObservability; });
  const auto scenario = netsim::load_scenario_file(kData + "/fixture.json");
  auto backend = agent::ScriptedBackend::from_file(kData + "/rules.json");
  std::vector<double> first;
  for (int run = 0; run < 3; ++run) {
    const auto report = run_suite(suite, *backend, scenario);
    std::vector<double> scores;
    for (const auto& r : report.rows) scores.push_back(*r.coherence);
    if (run == 0) first = scores;
    CHECK(scores == first);
  }
}

TEST_CASE("reference table, CSV outputs and baseline import") {
  const auto rows = load_reference(kData + "/published_backends.json");
  REQUIRE(rows.size() == 8);
  const auto table = render_reference_table(rows);
  CHECK(table.find("4.1 ± 0.5") != std::string::npos);
  CHECK(table.find("cloud") != std::string::npos);
  CHECK(table.find("llama3.2:1b-q4") != std::string::npos);

  const auto csv = pareto_csv(published_points());
  CHECK(csv.rfind("label,coherence,latency_s,deployment,vram_gb,frontier\n", 0) == 0);
  CHECK(csv.find("GPT-4.1,4.1,8.8,cloud,,1\n") != std::string::npos);
  CHECK(csv.find("mistral:7b,1,5.2,local,4.4,0\n") != std::string::npos);

  const auto cdf = cdf_csv({{"agent", {1.0, 2.0, 2.0}}, {"other", {}}});
  CHECK(cdf == "series,t_s,F\nagent,1,0.333333\nagent,2,1\n");

  const auto base = load_tta_baseline(kData + "/human_tta_baseline.csv");
  REQUIRE(base.size() == 2);
  CHECK(base[0].first == "human-beginner");
  CHECK(base[1].first == "human-expert");
  CHECK(base[0].second.size() == 30);

  const auto bad = std::filesystem::temp_directory_path() / "ranagent_bad_baseline.csv";
  std::ofstream(bad) << "who,when\nx,1\n";
  CHECK_THROWS_AS(load_tta_baseline(bad.string()), Error);
  std::ofstream(bad) << "group,tta_s\nx,abc\n";
  CHECK_THROWS_AS(load_tta_baseline(bad.string()), Error);
  CHECK_THROWS_AS(load_tta_baseline("/nonexistent.csv"), Error);
  CHECK_THROWS_AS(load_reference("/nonexistent.json"), Error);
}

TEST_CASE("external judge adapter") {
  httplib::Server server;
  json last;
  server.Post("/judge", [&](const httplib::Request& req, httplib::Response& res) {
    last = json::parse(req.body);
    res.set_content(R"({"choices": [{"message": {"content": "Score: 4.5"}}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  ExternalJudge judge("http://127.0.0.1:" + std::to_string(port) + "/judge", "judge-model");
  CHECK_FALSE(judge.deterministic());
  CHECK(judge.name() == "external:judge-model");
  auto v = judge.score("How many UEs?", "3 UEs", {num(3)});
  CHECK(v.score == 4.5);
  CHECK(v.matched == 1);
  CHECK(last["model"] == "judge-model");
  CHECK(judge.score("q", "", {num(3)}).score == 0.0);
  ExternalJudge broken("http://127.0.0.1:" + std::to_string(port) + "/missing", "m");
  CHECK_THROWS_AS(broken.score("q", "a", {num(1)}), Error);
  server.stop();
  th.join();
}
