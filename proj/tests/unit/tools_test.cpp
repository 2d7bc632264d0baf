#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "../support/random_ops.hpp"
#include "ranagent/common/error.hpp"
#include "ranagent/platform/platform.hpp"
#include "ranagent/tools/registry.hpp"

using namespace ranagent;
using namespace ranagent::tools;
using store::Kind;

namespace {

std::unique_ptr<platform::Platform> fixture() {
  return platform::Platform::from_file(std::string(RANAGENT_DATA_DIR) + "/fixture.json");
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kUsage;
}

void create_agora(ToolRegistry& tools) {
  auto a = tools.call_deployment("create_network", {{"name", "agora"}, {"access_networks", {"parthenon"}}, {"rics", 1}});
  REQUIRE(a.success);
}

// Keys whose net state differs between two spec maps, computed from the
// delta log rather than the maps.
std::set<store::ResourceKey> touched_by(const std::vector<store::Delta>& deltas, const store::SpecMap& before) {
  store::SpecMap replay = before;
  std::set<store::ResourceKey> keys;
  for (const auto& d : deltas) {
    store::fold(replay, d);
    keys.insert(d.key());
  }
  std::set<store::ResourceKey> out;
  for (const auto& k : keys) {
    auto a = before.find(k);
    auto b = replay.find(k);
    const bool same = (a == before.end() && b == replay.end()) ||
                      (a != before.end() && b != replay.end() && a->second == b->second);
    if (!same) out.insert(k);
  }
  return out;
}

}  // namespace

TEST_CASE("catalog shape") {
  const auto& schemas = builtin_schemas();
  std::set<std::string> names;
  int deploy = 0, monitor = 0;
  for (const auto& s : schemas) {
    CHECK_FALSE(s.description.empty());
    names.insert(s.name);
    if (s.kind == ToolKind::kDeployment) {
      ++deploy;
      CHECK_FALSE(s.mutates.empty());
    } else {
      ++monitor;
    }
  }
  CHECK(deploy == 10);
  CHECK(monitor == 7);
  CHECK(names.size() == schemas.size());
  store::ResourceStore s;
  ToolRegistry reg(s);
  auto cat = reg.catalog();
  CHECK(cat["schema_version"] == kToolSchemaVersion);
  CHECK(cat["tools"].size() == 17);
  CHECK(cat["tools"][0]["name"] == "list_networks");
  CHECK(reg.catalog() == cat);
}

TEST_CASE("monitoring collectors") {
  auto p = fixture();
  auto& tools = p->tools();
  const auto v0 = p->store().version();

  auto pj = tools.call_monitoring("get_policyjob", {{"name", "bubbleran-vpn"}});
  CHECK(pj["schema_version"] == 1);
  CHECK(pj["data"]["guaranteed_mbps"] == 5);
  CHECK(pj["data"]["max_mbps"] == 20);

  auto st = tools.call_monitoring("get_network_status", {{"name", "gnb1"}});
  CHECK(st["data"]["status"] == "up");
  CHECK(st["data"]["working"] == true);
  auto net = tools.call_monitoring("get_network_status", {{"name", "bubbleran"}});
  CHECK(net["data"]["access_networks"].size() == 2);
  CHECK(net["data"]["rics"] == json::array({"bubbleran-ric-1"}));

  auto terms = tools.call_monitoring("list_terminals", json::object());
  CHECK(terms["data"].size() == 3);
  auto urllc = tools.call_monitoring("list_terminals", {{"profile", "urllc"}});
  REQUIRE(urllc["data"].size() == 1);
  CHECK(urllc["data"][0]["name"] == "hypatia");
  CHECK(urllc["data"][0]["slices"] == json::array({"bubbleran-urllc"}));

  auto slices = tools.call_monitoring("list_slices", json::object());
  CHECK(slices["data"].size() == 2);

  auto k = tools.call_monitoring("get_kpis", {{"scope", "bubbleran-vpn"}, {"window", 3}});
  CHECK(k["data"]["scope"] == "slice/bubbleran-vpn");
  CHECK(k["data"]["samples"].size() == 3);
  CHECK(k["data"]["latest"]["throughput_mbps"].get<double>() <= 20.0 + 1e-9);

  auto logs = tools.call_monitoring("get_logs", {{"resource", "gnb1"}});
  CHECK_FALSE(logs["data"].empty());
  CHECK(tools.call_monitoring("list_networks", nullptr)["data"].size() == 1);

  CHECK(code_of([&] { tools.call_monitoring("get_weather", json::object()); }) == ErrorCode::kToolNotFound);
  CHECK(code_of([&] { tools.call_monitoring("create_network", json::object()); }) == ErrorCode::kToolNotFound);
  try {
    tools.call_monitoring("get_kpis", {{"scope", 3}});
    FAIL("expected argument error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kArgument);
    CHECK(std::string(e.what()).rfind("scope", 0) == 0);
  }
  CHECK(code_of([&] { tools.call_monitoring("get_network_status", json::object()); }) == ErrorCode::kArgument);
  CHECK(code_of([&] { tools.call_monitoring("get_network_status", {{"name", "nowhere"}}); }) == ErrorCode::kNotFound);
  CHECK(p->store().version() == v0);
}

TEST_CASE("empty store listings") {
  store::ResourceStore s;
  ToolRegistry reg(s);
  CHECK(reg.call_monitoring("list_terminals", json::object())["data"] == json::array());
  CHECK(reg.call_monitoring("get_policyjob", json::object())["data"] == json::array());
  CHECK(reg.call_monitoring("get_logs", json::object())["data"] == json::array());
}

TEST_CASE("create_network deploys a blueprint") {
  auto p = fixture();
  auto& s = p->store();
  const auto v0 = s.version();
  auto a = p->tools().call_deployment("create_network",
                                      {{"name", "agora"}, {"access_networks", {"parthenon"}}, {"rics", 1}});
  CHECK(a.preflight_passed);
  CHECK(a.success);
  REQUIRE(a.deltas.size() == 3);
  CHECK(a.deltas[0].key() == store::ResourceKey{Kind::kNetwork, "agora"});
  CHECK(a.deltas[1].key() == store::ResourceKey{Kind::kAccessNetwork, "parthenon"});
  CHECK(a.deltas[2].key() == store::ResourceKey{Kind::kRic, "agora-ric-1"});
  CHECK(a.exec_started.has_value());
  const auto log = s.history_since(v0);
  CHECK(log == a.deltas);

  auto again = p->tools().call_deployment("create_network", {{"name", "agora"}});
  CHECK_FALSE(again.preflight_passed);
  CHECK(again.reasons.at(0).reason == Reason::kAlreadyExists);

  p->settle();
  auto snap = p->sim().snapshot();
  CHECK(netsim::snapshot_topology(*snap).networks.size() == 2);
}

TEST_CASE("update_slice_policy emits one PolicyJob delta") {
  auto p = fixture();
  auto a = p->tools().call_deployment("update_slice_policy",
                                      {{"name", "bubbleran-vpn"}, {"guaranteed_mbps", 10}, {"max_mbps", 10}});
  REQUIRE(a.success);
  REQUIRE(a.deltas.size() == 1);
  CHECK(a.deltas[0].kind == Kind::kPolicyJob);
  CHECK(a.deltas[0].changed_fields.size() == 2);
  CHECK(a.deltas[0].changed_fields.count("spec.guaranteed_mbps") == 1);
  CHECK(a.deltas[0].changed_fields.count("spec.max_mbps") == 1);

  auto only_max = p->tools().call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}, {"max_mbps", 30}});
  REQUIRE(only_max.success);
  CHECK(p->store().get(Kind::kPolicyJob, "bubbleran-vpn").spec["guaranteed_mbps"] == 10);

  auto none = p->tools().call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}});
  CHECK(none.reasons.at(0).reason == Reason::kInvalidArgument);
  auto bad = p->tools().call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}, {"max_mbps", 1}});
  CHECK(bad.reasons.at(0).reason == Reason::kInvalidArgument);
}

TEST_CASE("preflight failures leave the store byte-identical") {
  auto p = fixture();
  auto& s = p->store();
  const auto h0 = s.state_hash();
  struct Case {
    std::string tool;
    json args;
    Reason reason;
  };
  const std::vector<Case> cases = {
      {"delete_terminal", {{"name", "plato"}}, Reason::kNotFound},
      {"create_terminal", {{"name", "socrates"}}, Reason::kAlreadyExists},
      {"connect_terminal", {{"name", "socrates"}, {"access_network", "parthenon.agora"}}, Reason::kNotFound},
      {"connect_terminal", {{"name", "socrates"}, {"access_network", "gnb1.elsewhere"}}, Reason::kNotFound},
      {"create_slice", {{"name", "big"}, {"access_network", "gnb1"}, {"guaranteed_mbps", 99}, {"max_mbps", 99}}, Reason::kAdmission},
      {"create_slice", {{"name", "x"}, {"access_network", "gnb1"}}, Reason::kInvalidArgument},
      {"create_network", {{"prompt", "make a network"}}, Reason::kInvalidArgument},
      {"create_network", {{"name", "bad name"}}, Reason::kInvalidArgument},
      {"create_ric", {{"network", "nowhere"}}, Reason::kNotFound},
      {"deploy_network", {{"name", "agora"}}, Reason::kToolNotFound},
      {"list_slices", json::object(), Reason::kToolNotFound},
      {"delete_slice", {{"name", "nope"}}, Reason::kNotFound},
      {"create_terminal", {{"name", "t"}, {"profile", "lte"}}, Reason::kInvalidArgument},
  };
  for (const auto& c : cases) {
    CAPTURE(c.tool);
    CAPTURE(c.args.dump());
    auto a = p->tools().call_deployment(c.tool, c.args);
    CHECK_FALSE(a.preflight_passed);
    CHECK_FALSE(a.executed);
    REQUIRE_FALSE(a.reasons.empty());
    CHECK(a.reasons[0].reason == c.reason);
    CHECK(s.state_hash() == h0);
  }
  auto a = p->tools().call_deployment("create_network", {{"prompt", "x"}});
  CHECK(a.reasons[0].parameter == "prompt");
}

TEST_CASE("terminal lifecycle and blueprint delete") {
  auto p = fixture();
  auto& tools = p->tools();
  create_agora(tools);
  auto c = tools.call_deployment("create_terminal", {{"name", "plato"}});
  auto k = tools.call_deployment("connect_terminal", {{"name", "plato"}, {"access_network", "parthenon.agora"}});
  REQUIRE(c.success);
  REQUIRE(k.success);
  CHECK(p->store().get(Kind::kTerminal, "plato").spec["access_network"] == "parthenon");

  auto blocked = tools.call_deployment("delete_network", {{"name", "agora"}});
  CHECK(blocked.reasons.at(0).reason == Reason::kDependency);
  CHECK(blocked.reasons[0].message.find("plato") != std::string::npos);

  auto d = tools.call_deployment("delete_terminal", {{"name", "plato"}});
  REQUIRE(d.success);
  auto del = tools.call_deployment("delete_network", {{"name", "agora"}});
  REQUIRE(del.success);
  CHECK(del.deltas.size() == 3);
  CHECK_FALSE(p->store().find(Kind::kNetwork, "agora"));

  auto hyp = tools.call_deployment("delete_terminal", {{"name", "hypatia"}});
  REQUIRE(hyp.success);
  CHECK(hyp.deltas.size() == 2);
  CHECK(p->store().get(Kind::kSlice, "bubbleran-urllc").spec["members"] == json::array());

  auto ds = tools.call_deployment("delete_slice", {{"name", "bubbleran-urllc"}});
  REQUIRE(ds.success);
  CHECK(ds.deltas.at(0).kind == Kind::kPolicyJob);
  CHECK(ds.deltas.at(1).kind == Kind::kSlice);
  auto ric = tools.call_deployment("create_ric", {{"network", "bubbleran"}});
  REQUIRE(ric.success);
  CHECK(ric.deltas.at(0).name == "bubbleran-ric-2");
}

TEST_CASE("multi-write actions roll back at every write position") {
  struct Case {
    std::string tool;
    json args;
    std::size_t writes;
  };
  const std::vector<Case> cases = {
      {"create_network", {{"name", "agora"}, {"access_networks", {"parthenon", "delphi"}}, {"rics", 2}}, 5},
      {"delete_network", {{"name", "bubbleran-edge"}}, 5},
      {"create_slice", {{"name", "iot"}, {"access_network", "gnb2"}, {"guaranteed_mbps", 5}, {"max_mbps", 15}}, 2},
      {"delete_slice", {{"name", "bubbleran-vpn"}}, 2},
      {"delete_terminal", {{"name", "socrates"}}, 2},
  };
  for (const auto& c : cases) {
    for (std::size_t fail_at = 0; fail_at < c.writes; ++fail_at) {
      CAPTURE(c.tool);
      CAPTURE(fail_at);
      auto p = fixture();
      auto& tools = p->tools();
      tools.call_deployment("create_network", {{"name", "bubbleran-edge"}, {"access_networks", {"edge1"}}, {"rics", 1}});
      tools.call_deployment("create_slice", {{"name", "edge-slice"}, {"access_network", "edge1"}, {"guaranteed_mbps", 1}, {"max_mbps", 2}});
      const auto content = p->store().content_hash();
      const auto v0 = p->store().version();
      tools.set_write_hook([&](std::size_t i) {
        if (i == fail_at) throw Error(ErrorCode::kBackend, "injected fault");
      });
      auto a = tools.call_deployment(c.tool, c.args);
      CHECK(a.preflight_passed);
      CHECK(a.executed);
      CHECK_FALSE(a.success);
      CHECK(a.rolled_back);
      CHECK(a.inverse.size() == fail_at);
      CHECK(a.deltas.size() == 2 * fail_at);
      CHECK(p->store().content_hash() == content);
      CHECK(p->store().history_since(v0) == a.deltas);

      tools.set_write_hook({});
      auto ok = tools.call_deployment(c.tool, c.args);
      CHECK(ok.success);
      CHECK(ok.deltas.size() == c.writes);
    }
  }
}

TEST_CASE("check_action examples") {
  auto p = fixture();
  auto before = p->store().specs().first;
  create_agora(p->tools());
  auto after = p->store().specs().first;
  std::vector<Expectation> agora = {
      expectation_from_json({{"kind", "Network"}, {"name", "agora"}}),
      expectation_from_json({{"kind", "AccessNetwork"}, {"name", "parthenon"}, {"fields", {{"spec.network", "agora"}}}}),
      expectation_from_json({{"kind", "Ric"}, {"count", 1}}),
  };
  CHECK(check_action(agora, before, after));
  CHECK_FALSE(check_action({agora[0], agora[1]}, before, after));

  auto b2 = p->store().specs().first;
  p->tools().call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}, {"max_mbps", 10}});
  auto a2 = p->store().specs().first;
  auto want30 = expectation_from_json({{"kind", "PolicyJob"}, {"name", "bubbleran-vpn"}, {"fields", {{"spec.max_mbps", 30}}}});
  CHECK_FALSE(check_action({want30}, b2, a2));
  auto want10 = expectation_from_json({{"kind", "PolicyJob"}, {"name", "bubbleran-vpn"}, {"fields", {{"spec.max_mbps", 10.0}}}});
  CHECK(check_action({want10}, b2, a2));

  auto b3 = p->store().specs().first;
  p->tools().call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}, {"max_mbps", 30}});
  p->tools().call_deployment("delete_slice", {{"name", "bubbleran-urllc"}});
  auto a3 = p->store().specs().first;
  CHECK_FALSE(check_action({want30}, b3, a3));
  auto gone = expectation_from_json({{"kind", "Slice"}, {"name", "bubbleran-urllc"}, {"exists", false}});
  auto gone_pj = expectation_from_json({{"kind", "PolicyJob"}, {"name", "bubbleran-urllc"}, {"exists", false}});
  CHECK(check_action({want30, gone, gone_pj}, b3, a3));
  CHECK_THROWS_AS(expectation_from_json({{"kind", "Slice"}}), Error);
}

TEST_CASE("check_action agrees with the delta-set oracle") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    store::ResourceStore s;
    testing::RandomOps ops(seed);
    for (int i = 0; i < 25; ++i) ops.step(s);
    const auto before = s.specs().first;
    const auto v0 = s.version();
    for (int i = 0; i < 8; ++i) ops.step(s);
    const auto after = s.specs().first;
    const auto touched = touched_by(s.history_since(v0), before);

    std::vector<Expectation> exact;
    for (const auto& k : touched) {
      Expectation e;
      e.kind = k.kind;
      e.name = k.name;
      auto it = after.find(k);
      e.exists = it != after.end();
      if (e.exists) e.fields = json(flatten(it->second));
      exact.push_back(e);
    }
    CAPTURE(seed);
    CHECK(check_action(exact, before, after));
    if (!exact.empty()) {
      auto missing = exact;
      missing.pop_back();
      CHECK_FALSE(check_action(missing, before, after));
      auto flipped = exact;
      flipped.back().exists = !flipped.back().exists;
      CHECK_FALSE(check_action(flipped, before, after));
    }
  }
}

TEST_CASE("concurrent deployment calls") {
  auto p = fixture();
  auto& tools = p->tools();
  const auto v0 = p->store().version();
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        const auto name = "ue" + std::to_string(t) + "-" + std::to_string(i);
        ok += tools.call_deployment("create_terminal", {{"name", name}, {"access_network", "gnb1"}}).success;
        ok += tools.call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}, {"max_mbps", 10 + i}}).success;
      }
    });
  for (auto& th : threads) th.join();
  CHECK(ok == 80);
  auto log = p->store().history_since(v0);
  for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].version == v0 + 1 + static_cast<std::int64_t>(i));
  std::ostringstream audit;
  tools.write_audit_ndjson(audit);
  const auto text = audit.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 80);
  auto first = json::parse(text.substr(0, text.find('\n')));
  CHECK(first.contains("preflight"));
  CHECK(first["result"]["success"] == true);
}

TEST_CASE("policy changes reach the simulator") {
  auto p = fixture();
  p->tools().call_deployment("update_slice_policy", {{"name", "bubbleran-vpn"}, {"max_mbps", 30}});
  p->advance(1);
  auto latest = p->sim().latest("slice/bubbleran-vpn");
  REQUIRE(latest);
  CHECK(latest->throughput_mbps == doctest::Approx(30.0));
  auto logs = p->tools().call_monitoring("get_logs", {{"resource", "Slice/bubbleran-vpn"}});
  CHECK(logs["data"].back()["message"].get<std::string>().find("max 30 Mbps") != std::string::npos);
}
