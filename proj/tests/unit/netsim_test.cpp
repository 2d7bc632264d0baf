#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "ranagent/common/error.hpp"
#include "ranagent/netsim/model.hpp"
#include "ranagent/netsim/simulator.hpp"

using namespace ranagent;
using namespace ranagent::netsim;

namespace {

// Independent oracle: raise a common fill level in small increments. Every
// slice first takes its guarantee (bounded by demand); then each increment
// of the level gives every slice the same fraction of its unmet demand,
// until capacity or all demand is used up.
std::vector<double> water_fill_oracle(const std::vector<SliceDemand>& d, double capacity,
                                      double step = 1e-6) {
  std::vector<double> base(d.size()), unmet(d.size());
  double used = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double ceiling = std::min(d[i].offered_mbps, d[i].max_mbps);
    base[i] = std::min(d[i].guaranteed_mbps, ceiling);
    unmet[i] = ceiling - base[i];
    used += base[i];
  }
  double level = 0.0;
  while (level + step <= 1.0) {
    double next_used = used;
    for (std::size_t i = 0; i < d.size(); ++i) next_used += unmet[i] * step;
    if (next_used > capacity) break;
    used = next_used;
    level += step;
  }
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = base[i] + unmet[i] * level;
  return out;
}

SimState one_cell(double capacity) {
  SimState s;
  SimNetwork n{"bubbleran", {}, 1, true};
  n.access_networks.push_back({"gnb1", "bubbleran", capacity, LinkStatus::kUp, {{"gnb1-c1", 106, 3619.2}}});
  s.networks.push_back(n);
  return s;
}

double slice_tp(const std::vector<KpiSample>& samples, const std::string& slice) {
  for (const auto& s : samples)
    if (s.scope.kind == ScopeKind::kSlice && s.scope.name == slice) return s.throughput_mbps;
  FAIL("no sample for slice " << slice);
  return -1;
}

SimState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cap(10.0, 200.0), load(0.0, 80.0), u(0.0, 1.0);
  std::uniform_int_distribution<int> cnt(0, 4);
  SimState s;
  s.seed = rng();
  const int nets = 1 + cnt(rng) % 2;
  int term_id = 0;
  for (int n = 0; n < nets; ++n) {
    SimNetwork net{"net" + std::to_string(n), {}, cnt(rng), u(rng) < 0.5};
    const int ans = 1 + cnt(rng) % 3;
    for (int a = 0; a < ans; ++a) {
      SimAccessNetwork an{net.name + "-an" + std::to_string(a), net.name, cap(rng),
                          u(rng) < 0.8 ? LinkStatus::kUp : LinkStatus::kDegraded,
                          {{"c" + std::to_string(a), 50 + cnt(rng) * 20, 3500.0}}};
      std::vector<std::string> attached;
      const int terms = cnt(rng) + cnt(rng);
      for (int t = 0; t < terms; ++t) {
        SimTerminal term{"ue" + std::to_string(term_id++), an.name,
                         u(rng) < 0.5 ? Profile::kEmbb : Profile::kUrllc, load(rng)};
        attached.push_back(term.name);
        s.terminals.push_back(term);
      }
      // Slices partition a random subset of the attached terminals and
      // split at most the whole capacity between their guarantees.
      double budget = an.cell_capacity_mbps;
      std::shuffle(attached.begin(), attached.end(), rng);
      const int slices = cnt(rng) % 3;
      std::size_t next = 0;
      for (int k = 0; k < slices; ++k) {
        SlicePolicy p;
        p.slice_name = an.name + "-s" + std::to_string(k);
        p.network = an.name;
        p.guaranteed_mbps = budget * u(rng) * 0.6;
        budget -= p.guaranteed_mbps;
        p.max_mbps = p.guaranteed_mbps + u(rng) * 80.0;
        const std::size_t take = std::min<std::size_t>(attached.size() - next, cnt(rng));
        for (std::size_t m = 0; m < take; ++m) p.member_terminals.push_back(attached[next++]);
        s.slices.push_back(p);
      }
      net.access_networks.push_back(an);
    }
    s.networks.push_back(net);
  }
  s.terminals.push_back({"idle", std::nullopt, Profile::kEmbb, 5.0});
  return s;
}

}  // namespace

TEST_CASE("capacity split matches the brute-force water-filling oracle") {
  SUBCASE("two slices sharing residual by unmet demand") {
    const std::vector<SliceDemand> d{{30, 80, 70}, {10, 80, 70}};
    const auto oracle = water_fill_oracle(d, 100);
    // Frozen from the oracle above: guarantees 30/10, residual 60 split 40:60.
    CHECK(oracle[0] == doctest::Approx(54.0).epsilon(1e-4));
    CHECK(oracle[1] == doctest::Approx(46.0).epsilon(1e-4));
    const auto got = allocate_capacity(d, 100);
    CHECK(got[0] == doctest::Approx(54.0));
    CHECK(got[1] == doctest::Approx(46.0));
  }
  SUBCASE("random demand sets") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 60.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<SliceDemand> d(1 + trial % 5);
      double gsum = 0.0;
      for (auto& x : d) {
        x.guaranteed_mbps = u(rng) * 0.5;
        x.max_mbps = x.guaranteed_mbps + u(rng);
        x.offered_mbps = u(rng) * 2;
        gsum += x.guaranteed_mbps;
      }
      const double cap = gsum + u(rng) * 2;
      const auto oracle = water_fill_oracle(d, cap, 1e-5);
      const auto got = allocate_capacity(d, cap);
      for (std::size_t i = 0; i < d.size(); ++i) CHECK(got[i] == doctest::Approx(oracle[i]).epsilon(1e-3));
    }
  }
}

TEST_CASE("step clips a saturated slice at its max") {
  auto s = one_cell(100);
  s.terminals.push_back({"socrates", "gnb1", Profile::kEmbb, 25});
  s.slices.push_back({"bubbleran-vpn", "gnb1", 10, 10, {"socrates"}});
  const auto r = step(s, 1);
  CHECK(slice_tp(r.samples, "bubbleran-vpn") == 10.0);
  CHECK(r.state.tick == 1);
}

TEST_CASE("step emits one sample per slice and attached terminal per tick") {
  auto s = one_cell(100);
  s.terminals.push_back({"a", "gnb1", Profile::kEmbb, 10});
  s.terminals.push_back({"b", "gnb1", Profile::kUrllc, 1});
  s.terminals.push_back({"floating", std::nullopt, Profile::kEmbb, 3});
  s.slices.push_back({"s1", "gnb1", 0, 50, {"a"}});
  const auto r = step(s, 3);
  CHECK(r.samples.size() == 3 * 3);  // s1 + a + b, three ticks
  CHECK(r.samples.front().timestamp == 1);
  CHECK(r.samples.back().timestamp == 3);
  for (const auto& k : r.samples) CHECK(k.scope.name != "floating");
}

TEST_CASE("slices without terminals carry zero throughput") {
  auto s = one_cell(100);
  s.slices.push_back({"empty", "gnb1", 20, 40, {}});
  const auto r = step(s, 1);
  REQUIRE(r.samples.size() == 1);
  CHECK(r.samples[0].throughput_mbps == 0.0);
}

TEST_CASE("latency follows profile base plus load term") {
  auto s = one_cell(100);
  s.terminals.push_back({"e", "gnb1", Profile::kEmbb, 50});
  s.terminals.push_back({"u", "gnb1", Profile::kUrllc, 50});
  const auto r = step(s, 1);
  for (const auto& k : r.samples) {
    const double base = k.scope.name == "e" ? kEmbbBaseLatencyMs : kUrllcBaseLatencyMs;
    CHECK(k.latency_ms >= base + kLoadLatencyMs * 1.0);
    CHECK(k.latency_ms < base + kLoadLatencyMs * 1.0 + kMaxJitterMs);
    CHECK(k.prb_used == 53);
  }
}

TEST_CASE("step rejects dangling references with an integrity error") {
  auto s = one_cell(100);
  s.terminals.push_back({"plato", "parthenon", Profile::kEmbb, 1});
  try {
    step(s, 1);
    FAIL("expected integrity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIntegrity);
    CHECK(std::string(e.what()).find("parthenon") != std::string::npos);
  }
  CHECK_THROWS_AS(step(one_cell(100), 0), Error);
}

TEST_CASE("zero-capacity access networks are rejected at construction") {
  json doc = {{"networks", {{{"name", "n"}, {"access_networks", {{{"name", "a"}, {"cell_capacity_mbps", 0}}}}}}}};
  try {
    load_scenario(doc);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
  }
}

TEST_CASE("apply_slice_policy") {
  auto s = one_cell(100);
  s.terminals.push_back({"socrates", "gnb1", Profile::kEmbb, 25});
  s.terminals.push_back({"aristotle", "gnb1", Profile::kEmbb, 25});
  s.slices.push_back({"bubbleran-vpn", "gnb1", 5, 20, {"socrates", "aristotle"}});

  SUBCASE("10/10 caps the next tick") {
    auto next = apply_slice_policy(s, {"bubbleran-vpn", "gnb1", 10, 10, {"socrates", "aristotle"}});
    CHECK(slice_tp(step(next, 1).samples, "bubbleran-vpn") <= 10.0);
  }
  SUBCASE("30/30 exposes a 30 Mbps ceiling") {
    auto next = apply_slice_policy(s, {"bubbleran-vpn", "gnb1", 30, 30, {"socrates", "aristotle"}});
    CHECK(slice_tp(step(next, 1).samples, "bubbleran-vpn") == 30.0);
  }
  SUBCASE("guaranteed above max is rejected and state is untouched") {
    try {
      apply_slice_policy(s, {"bubbleran-vpn", "gnb1", 50, 40, {}});
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kValidation);
    }
    CHECK(s.slices[0].max_mbps == 20);
  }
  SUBCASE("guarantees above capacity fail admission") {
    try {
      apply_slice_policy(s, {"other", "gnb1", 96, 100, {}});
      FAIL("expected admission error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kAdmission);
    }
  }
}

TEST_CASE("snapshot_topology") {
  SUBCASE("agora with parthenon") {
    SimState s;
    s.networks.push_back({"agora", {{"parthenon", "agora", 50, LinkStatus::kUp, {}}}, 1, false});
    const auto r = snapshot_topology(s);
    CHECK(r.networks == std::vector<std::string>{"agora"});
    CHECK(r.access_networks == std::vector<std::string>{"parthenon"});
    CHECK(r.rics == 1);
  }
  SUBCASE("empty") {
    const auto r = snapshot_topology(SimState{});
    CHECK(r.networks.empty());
    CHECK(r.access_networks.empty());
    CHECK(r.terminals.empty());
    CHECK(r.slices.empty());
  }
  SUBCASE("three UEs") {
    auto s = load_scenario_file(RANAGENT_DATA_DIR "/fixture.json");
    const auto r = snapshot_topology(s);
    CHECK(r.terminals.size() == 3);
  }
}

TEST_CASE("scenario json round-trips") {
  auto s = load_scenario_file(RANAGENT_DATA_DIR "/fixture.json");
  auto again = load_scenario(scenario_to_json(s));
  CHECK(scenario_to_json(again) == scenario_to_json(s));
}

TEST_CASE("property: conservation, guarantees and determinism over random states") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_state(rng);
    REQUIRE_NOTHROW(validate(s));
    const auto r = step(s, 2);
    std::map<std::pair<std::int64_t, std::string>, double> per_an;
    for (const auto& k : r.samples) {
      CHECK(k.throughput_mbps >= 0.0);
      const auto* an = find_access_network(s, k.scope.access_network);
      CHECK(k.prb_used <= an->prb_total());
      if (k.scope.kind == ScopeKind::kTerminal) per_an[{k.timestamp, an->name}] += k.throughput_mbps;
    }
    for (const auto& [key, total] : per_an)
      CHECK(total <= find_access_network(s, key.second)->cell_capacity_mbps + 1e-9);

    for (const auto& p : s.slices) {
      const auto* an = find_access_network(s, p.network);
      if (an->status != LinkStatus::kUp) continue;
      double load = 0.0;
      for (const auto& m : p.member_terminals) load += find_terminal(s, m)->offered_load_mbps;
      if (load >= p.guaranteed_mbps) CHECK(slice_tp(r.samples, p.slice_name) >= p.guaranteed_mbps - 1e-9);
      CHECK(slice_tp(r.samples, p.slice_name) <= p.max_mbps + 1e-9);
    }

    const auto again = step(s, 2);
    REQUIRE(again.samples.size() == r.samples.size());
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      CHECK(again.samples[i].throughput_mbps == r.samples[i].throughput_mbps);
      CHECK(again.samples[i].latency_ms == r.samples[i].latency_ms);
    }
  }
}

TEST_CASE("policy updates are atomic with respect to concurrent steps") {
  auto s = one_cell(100);
  s.terminals.push_back({"socrates", "gnb1", Profile::kEmbb, 60});
  s.slices.push_back({"vpn", "gnb1", 5, 10, {"socrates"}});
  Simulator sim(s);
  std::atomic<bool> done{false};
  std::thread writer([&] {
    for (int i = 0; i < 200; ++i) {
      const double max = (i % 2) ? 10.0 : 30.0;
      sim.apply_policy({"vpn", "gnb1", 5, max, {"socrates"}});
    }
    done = true;
  });
  int violations = 0;
  while (!done) {
    for (const auto& k : sim.advance(1)) {
      if (k.scope.kind == ScopeKind::kSlice && k.throughput_mbps > 30.0) ++violations;
      // A snapshot is either the old or the new policy, never a mix.
      const auto snap = sim.snapshot();
      const double m = snap->slices[0].max_mbps;
      if (m != 10.0 && m != 30.0) ++violations;
    }
  }
  writer.join();
  CHECK(violations == 0);
}

TEST_CASE("simulator keeps a bounded KPI history per scope") {
  auto s = one_cell(100);
  s.terminals.push_back({"a", "gnb1", Profile::kEmbb, 10});
  Simulator sim(s, 5);
  sim.advance(8);
  const auto series = sim.series("terminal/a", 0, 100);
  CHECK(series.size() == 5);
  CHECK(series.front().timestamp == 4);
  CHECK(sim.latest("terminal/a")->timestamp == 8);
  CHECK_FALSE(sim.latest("terminal/none").has_value());

  std::ostringstream out;
  write_kpi_ndjson(out, series);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(kpi_from_json(json::parse(line)).timestamp == 4);
}
