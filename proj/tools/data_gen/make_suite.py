#!/usr/bin/env python3
"""Writes data/suite.json and data/rules.json from one table so prompts,
rules, rubrics and expectations stay in step."""
import json
import pathlib

NUM = r"(\d+(?:\.\d+)?)"
NAME = r"([\w-]+)"

AGORA = {"tool": "create_network", "arguments": {"name": "agora", "access_networks": ["parthenon"], "rics": 1}}
PLATO = {"tool": "create_terminal", "arguments": {"name": "plato", "access_network": "parthenon"}}


def ex(kind, name=None, exists=True, fields=None, count=None, prefix=None):
    e = {"kind": kind, "exists": exists}
    if name is not None:
        e["name"] = name
    if fields:
        e["fields"] = fields
    if count is not None:
        e["count"] = count
    if prefix:
        e["prefix"] = prefix
    return e


def call(tool, **arguments):
    return {"tool": tool, "arguments": arguments}


CONTROL = [
    dict(id="c01", text="Create a network with name agora with 1 access network called parthenon and 1 RIC.",
         pattern=rf"create a network with name {NAME} with (\d+) access networks? called {NAME} and (\d+) rics?",
         calls=[call("create_network", name="$1", access_networks=["$3"], rics="$4:int")],
         answer="Network $1 deployed with access network $3 and $4 RIC ({0:result.deltas|count} resources created).",
         expect=[ex("Network", "agora"), ex("AccessNetwork", "parthenon", fields={"spec.network": "agora"}),
                 ex("Ric", count=1, prefix="agora-ric-")]),
    dict(id="c02", text="Create a terminal with name plato and connect it to the parthenon.agora access network.",
         pattern=rf"create a terminal with name {NAME} and connect it to the ([\w.-]+) access network",
         calls=[call("create_terminal", name="$1"), call("connect_terminal", name="$1", access_network="$2")],
         answer="Terminal $1 created and connected to $2.",
         setup=[AGORA],
         expect=[ex("Terminal", "plato", fields={"spec.access_network": "parthenon"})]),
    dict(id="c03", text="Delete the terminal with name plato.",
         pattern=rf"delete the terminal with name {NAME}",
         calls=[call("delete_terminal", name="$1")],
         answer="Terminal $1 deleted.",
         setup=[AGORA, PLATO],
         expect=[ex("Terminal", "plato", exists=False)]),
    dict(id="c04", text="Delete the network blueprint with name agora.",
         pattern=rf"delete the network blueprint with name {NAME}",
         calls=[call("delete_network", name="$1")],
         answer="Network blueprint $1 deleted ({0:result.deltas|count} resources removed).",
         setup=[AGORA],
         expect=[ex("Network", "agora", exists=False), ex("AccessNetwork", "parthenon", exists=False),
                 ex("Ric", count=1, exists=False, prefix="agora-ric-")]),
    dict(id="c05", text="Change the bubbleran VPN slice to 10 Mbps guaranteed and maximum throughput.",
         pattern=rf"change the {NAME} (\w+) slice to {NUM} ?mbps guaranteed and maximum throughput",
         calls=[call("update_slice_policy", name="$1-$2", guaranteed_mbps="$3:num", max_mbps="$3:num")],
         answer="Slice $1-$2 now has $3 Mbps guaranteed and $3 Mbps maximum throughput.",
         expect=[ex("PolicyJob", "bubbleran-vpn", fields={"spec.guaranteed_mbps": 10, "spec.max_mbps": 10})]),
    dict(id="c06", text="Increase the bubbleran VPN slice maximum throughput to 30 Mbps.",
         pattern=rf"increase the {NAME} (\w+) slice maximum throughput to {NUM} ?mbps",
         calls=[call("update_slice_policy", name="$1-$2", max_mbps="$3:num")],
         answer="Slice $1-$2 maximum throughput raised to $3 Mbps.",
         expect=[ex("PolicyJob", "bubbleran-vpn", fields={"spec.guaranteed_mbps": 5, "spec.max_mbps": 30})]),
    dict(id="c07", text="Deploy an additional RIC in the bubbleran network.",
         pattern=rf"deploy an additional ric in the {NAME} network",
         calls=[call("create_ric", network="$1")],
         answer="RIC {0:result.deltas|names} deployed in network $1.",
         expect=[ex("Ric", count=1, prefix="bubbleran-ric-")]),
    dict(id="c08", text="Create an access network called delphi with 40 Mbps capacity in the bubbleran network.",
         pattern=rf"create an access network called {NAME} with {NUM} ?mbps capacity in the {NAME} network",
         calls=[call("create_access_network", name="$1", network="$3", cell_capacity_mbps="$2:num")],
         answer="Access network $1 created in $3 with $2 Mbps capacity.",
         expect=[ex("AccessNetwork", "delphi", fields={"spec.network": "bubbleran", "spec.cell_capacity_mbps": 40})]),
    dict(id="c09", text="Create a slice called bubbleran-iot on gnb2 with 5 Mbps guaranteed and 15 Mbps maximum throughput.",
         pattern=rf"create a slice called {NAME} on {NAME} with {NUM} ?mbps guaranteed and {NUM} ?mbps maximum throughput",
         calls=[call("create_slice", name="$1", access_network="$2", guaranteed_mbps="$3:num", max_mbps="$4:num")],
         answer="Slice $1 created on $2 with $3 Mbps guaranteed and $4 Mbps maximum throughput.",
         expect=[ex("Slice", "bubbleran-iot", fields={"spec.access_network": "gnb2"}),
                 ex("PolicyJob", "bubbleran-iot", fields={"spec.guaranteed_mbps": 5, "spec.max_mbps": 15})]),
    dict(id="c10", text="Delete the URLLC slice of the bubbleran network.",
         pattern=rf"delete the (\w+) slice of the {NAME} network",
         calls=[call("delete_slice", name="$2-$1")],
         answer="Slice $2-$1 and its PolicyJob deleted.",
         expect=[ex("Slice", "bubbleran-urllc", exists=False), ex("PolicyJob", "bubbleran-urllc", exists=False)]),
]


def lit(s):
    return {"literal": s}


def count(kind, **where):
    f = {"kind": kind}
    if where:
        f["where"] = where
    return {"count": f}


def names(kind, **where):
    f = {"kind": kind}
    if where:
        f["where"] = where
    return {"names": f}


def field(kind, name, path, pluck=None):
    f = {"kind": kind, "name": name, "path": path}
    if pluck:
        f["pluck"] = pluck
    return {"field": f}


def kpi(scope, metric, window=None):
    f = {"scope": scope, "metric": metric}
    if window:
        f["window"] = window
    return {"kpi": f}


OBS = [
    # topology and CRDs
    ("o01", "topology", "Is there any access network?", r"is there any access network",
     [call("list_networks")],
     "Yes. There are {0:data|field:access_networks|flat|count} access networks: {0:data|field:access_networks|flat|join}.",
     [count("AccessNetwork"), names("AccessNetwork")]),
    ("o02", "topology", "Tell me the name of the available access and core networks.",
     r"name of the available access and core networks", [call("list_networks")],
     "Access networks: {0:data|field:access_networks|flat|join}. Core networks: {0:data|names}.",
     [names("AccessNetwork"), names("Network")]),
    ("o03", "topology",
     "Based on the current context, give me an overview of the gnb2 access network cells and radio configuration.",
     rf"overview of the {NAME} access network cells", [call("get_network_status", name="$1")],
     "Access network $1 (network {0:data.network}) is {0:data.status} with {0:data.cell_capacity_mbps} Mbps capacity "
     "and {0:data.cells|count} cells: {0:data.cells|field:cell_id}, with {0:data.cells|field:prb_total} PRBs respectively.",
     [field("AccessNetwork", "gnb2", "cells", "cell_id"), field("AccessNetwork", "gnb2", "cells", "prb_total"),
      field("AccessNetwork", "gnb2", "cell_capacity_mbps"), field("AccessNetwork", "gnb2", "status")]),
    ("o04", "topology", "Check the current network status: is the gnb1 element working properly?",
     rf"is the {NAME} element working properly", [call("get_network_status", name="$1")],
     "Status of $1: {0:data.status}. Working properly: {0:data.working|yesno}.",
     [lit("gnb1"), field("AccessNetwork", "gnb1", "status")]),
    ("o05", "topology", "How many UEs are available in the current deployment?", r"how many ues are available",
     [call("list_terminals")], "There are {0:data|count} UEs available in the current deployment.",
     [count("Terminal")]),
    ("o06", "topology", "What are the names of the UEs in the current deployment?", r"what are the names of the ues",
     [call("list_terminals")], "The UEs are {0:data|names}.", [names("Terminal")]),
    ("o07", "policies", "What are the max and guaranteed throughput in the PolicyJob CRD of VPN slice?",
     r"max and guaranteed throughput in the policyjob crd of (\w+) slice",
     [call("get_policyjob", name="bubbleran-$1")],
     "PolicyJob {0:data.name}: max {0:data.max_mbps} Mbps, guaranteed {0:data.guaranteed_mbps} Mbps.",
     [field("PolicyJob", "bubbleran-vpn", "max_mbps"), field("PolicyJob", "bubbleran-vpn", "guaranteed_mbps")]),
    ("o08", "topology", "How many RICs are deployed?", r"how many rics", [call("list_networks")],
     "{0:data|field:rics|flat|count} RIC(s) deployed: {0:data|field:rics|flat|join}.", [count("Ric")]),
    ("o09", "topology", "Which network does each RIC belong to?", r"which network does each ric belong to",
     [call("list_networks")], "Network {0:data|names} hosts RICs {0:data|field:rics|flat|join}.",
     [names("Ric"), names("Network")]),
    ("o10", "topology", "Is a core network present in the bubbleran deployment?",
     rf"core network present in the {NAME}", [call("get_network_status", name="$1")],
     "Core network present in $1: {0:data.core_present|yesno}.", [field("Network", "bubbleran", "core_present")]),
    ("o11", "slices", "List the slices configured in the deployment.", r"list the slices", [call("list_slices")],
     "Configured slices: {0:data|names}.", [names("Slice")]),
    ("o12", "slices", "Which terminals are members of the VPN slice?", r"which terminals are members of the (\w+) slice",
     [call("list_slices", name="bubbleran-$1")], "Members of bubbleran-$1: {0:data|field:members|flat|join}.",
     [field("Slice", "bubbleran-vpn", "members")]),
    ("o13", "policies", "What is the guaranteed throughput of the URLLC slice?",
     r"guaranteed throughput of the (\w+) slice", [call("get_policyjob", name="bubbleran-$1")],
     "The {0:data.slice} slice guarantees {0:data.guaranteed_mbps} Mbps.",
     [field("PolicyJob", "bubbleran-urllc", "guaranteed_mbps")]),
    ("o14", "policies", "What is the maximum throughput of the URLLC slice?",
     r"(?:max|maximum) throughput of the (\w+) slice", [],
     "The maximum throughput of the $1 slice is {hit:PolicyJob/bubbleran-$1:max_mbps} Mbps.",
     [field("PolicyJob", "bubbleran-urllc", "max_mbps")]),
    ("o15", "slices", "Which access network hosts the URLLC slice?", r"which access network hosts the (\w+) slice",
     [call("list_slices", name="bubbleran-$1")], "The $1 slice runs on {0:data|field:access_network|join}.",
     [field("Slice", "bubbleran-urllc", "access_network")]),
    ("o16", "topology", "Which access network is socrates connected to?", rf"which access network is {NAME} connected to",
     [call("list_terminals", name="$1")], "$1 is connected to {0:data|field:access_network|join}.",
     [field("Terminal", "socrates", "access_network")]),
    ("o17", "crds", "What traffic profile does hypatia use?", rf"what traffic profile does {NAME} use",
     [call("list_terminals", name="$1")], "$1 uses the {0:data|field:profile|join} profile.",
     [field("Terminal", "hypatia", "profile")]),
    ("o18", "crds", "Which terminals use the eMBB profile?", r"which terminals use the (\w+) profile",
     [call("list_terminals", profile="$1")], "Terminals with profile $1: {0:data|names}.",
     [names("Terminal", field="profile", equals="embb")]),
    ("o19", "topology", "How many terminals are attached to gnb1?", rf"how many terminals are attached to {NAME}",
     [call("list_terminals", access_network="$1")], "{0:data|count} terminals are attached to $1.",
     [count("Terminal", field="access_network", equals="gnb1")]),
    ("o20", "crds", "What is the offered load of aristotle?", rf"offered load of {NAME}",
     [call("list_terminals", name="$1")], "$1 offers {0:data|field:offered_load_mbps|join} Mbps.",
     [field("Terminal", "aristotle", "offered_load_mbps")]),
    ("o21", "crds", "What is the cell capacity of gnb1?", rf"cell capacity of {NAME}",
     [call("get_network_status", name="$1")], "The cell capacity of $1 is {0:data.cell_capacity_mbps} Mbps.",
     [field("AccessNetwork", "gnb1", "cell_capacity_mbps")]),
    ("o22", "crds", "How many PRBs does the gnb1 cell have?", rf"how many prbs does the {NAME} cell have",
     [call("get_network_status", name="$1")], "The $1 cell has {0:data.cells|field:prb_total} PRBs.",
     [field("AccessNetwork", "gnb1", "cells", "prb_total")]),
    ("o23", "crds", "What is the center frequency of the gnb1 cell?", rf"center frequency of the {NAME} cell", [],
     "The $1 cell is centred at {hit:AccessNetwork/$1:center_frequency_mhz} MHz.",
     [field("AccessNetwork", "gnb1", "cells", "center_frequency_mhz")]),
    ("o24", "topology", "Is gnb2 operating normally?", rf"is {NAME} operating normally",
     [call("get_network_status", name="$1")], "$1 status is {0:data.status}; operating normally: {0:data.working|yesno}.",
     [field("AccessNetwork", "gnb2", "status")]),
    ("o25", "slices", "Which slice is hypatia a member of?", rf"which slice is {NAME} a member of",
     [call("list_terminals", name="$1")], "$1 belongs to {0:data|field:slices|flat|join}.",
     [names("Slice", field="members", contains="hypatia")]),
    # KPIs
    ("o26", "kpis", "What is the current throughput of the VPN slice?", r"current throughput of the (\w+) slice",
     [call("get_kpis", scope="slice/bubbleran-$1")], "The $1 slice currently carries {0:data.latest.throughput_mbps} Mbps.",
     [kpi("slice/bubbleran-vpn", "throughput_mbps")]),
    ("o27", "kpis", "What is the current latency of the URLLC slice?", r"current latency of the (\w+) slice",
     [call("get_kpis", scope="slice/bubbleran-$1")], "The $1 slice latency is {0:data.latest.latency_ms} ms.",
     [kpi("slice/bubbleran-urllc", "latency_ms")]),
    ("o28", "kpis", "How many PRBs is the VPN slice using?", r"how many prbs is the (\w+) slice using",
     [call("get_kpis", scope="slice/bubbleran-$1")], "The $1 slice uses {0:data.latest.prb_used} PRBs.",
     [kpi("slice/bubbleran-vpn", "prb_used")]),
    ("o29", "kpis", "What throughput is socrates getting?", rf"what throughput is {NAME} getting",
     [call("get_kpis", scope="terminal/$1")], "$1 is getting {0:data.latest.throughput_mbps} Mbps.",
     [kpi("terminal/socrates", "throughput_mbps")]),
    ("o30", "kpis", "What is the latency experienced by hypatia?", rf"latency experienced by {NAME}",
     [call("get_kpis", scope="terminal/$1")], "$1 experiences {0:data.latest.latency_ms} ms latency.",
     [kpi("terminal/hypatia", "latency_ms")]),
    ("o31", "kpis", "What is the average throughput of the VPN slice over the last 10 ticks?",
     r"average throughput of the (\w+) slice over the last (\d+) ticks",
     [call("get_kpis", scope="slice/bubbleran-$1", window="$2:int")],
     "Average throughput of the $1 slice over $2 ticks: {0:data.mean_throughput_mbps} Mbps.",
     [kpi("slice/bubbleran-vpn", "throughput_mbps", window=10)]),
    ("o32", "kpis", "Is the VPN slice reaching its maximum throughput?",
     r"is the (\w+) slice reaching its maximum throughput",
     [call("get_kpis", scope="slice/bubbleran-$1"), call("get_policyjob", name="bubbleran-$1")],
     "The $1 slice carries {0:data.latest.throughput_mbps} Mbps against a maximum of {1:data.max_mbps} Mbps.",
     [kpi("slice/bubbleran-vpn", "throughput_mbps"), field("PolicyJob", "bubbleran-vpn", "max_mbps")]),
    ("o33", "kpis", "What is the PRB usage of the URLLC slice?", r"prb usage of the (\w+) slice",
     [call("get_kpis", scope="slice/bubbleran-$1")], "The $1 slice uses {0:data.latest.prb_used} PRBs.",
     [kpi("slice/bubbleran-urllc", "prb_used")]),
    # logs
    ("o34", "logs", "Show me the recent logs for the VPN slice.", r"recent logs for the (\w+) slice",
     [call("get_logs", resource="Slice/bubbleran-$1")], "Recent log lines: {0:data|field:message|join}.",
     [{"log": {"resource": "Slice/bubbleran-vpn"}}]),
    ("o35", "logs", "What was the last change applied to the VPN PolicyJob?", r"last change applied to the (\w+) policyjob",
     [call("get_logs", resource="PolicyJob/bubbleran-$1", limit=1)],
     "Last change to PolicyJob bubbleran-$1: {0:data|field:message|join}.",
     [{"log": {"resource": "PolicyJob/bubbleran-vpn"}}]),
    ("o36", "logs", "Are there any errors in the platform logs?", r"any errors in the platform logs",
     [call("get_logs", limit=50)],
     "{0:data|where:level=error|count} errors in the last {0:data|count} log lines.",
     [{"log_count": {"level": "error", "limit": 50}}]),
    ("o37", "logs", "When was the terminal hypatia created?", rf"when was the terminal {NAME} created",
     [call("get_logs", resource="Terminal/$1")], "Terminal $1 log: {0:data|field:message|join}.",
     [lit("created"), field("Terminal", "hypatia", "$version")]),
    # summaries
    ("o38", "topology", "Give me a summary of the bubbleran network.", rf"summary of the {NAME} network",
     [call("get_network_status", name="$1")],
     "Network $1: core present {0:data.core_present|yesno}, status {0:data.status}, access networks "
     "{0:data.access_networks|names}, RICs {0:data.rics}.",
     [names("AccessNetwork"), names("Ric"), field("Network", "bubbleran", "core_present")]),
    ("o39", "crds", "Which RIC type is deployed in bubbleran?", rf"which ric type is deployed in {NAME}", [],
     "The RIC in $1 is of type {hit:Ric/$1-ric-1:type}.", [field("Ric", "bubbleran-ric-1", "type")]),
    ("o40", "slices", "How many slices are there and what are their names?", r"how many slices are there",
     [call("list_slices")], "There are {0:data|count} slices: {0:data|names}.", [count("Slice"), names("Slice")]),
]


def main():
    root = pathlib.Path(__file__).resolve().parents[2] / "data"
    rules, queries = [], []
    for c in CONTROL:
        rules.append({"id": c["id"], "pattern": c["pattern"], "branch": "deployment", "calls": c["calls"],
                      "answer": c["answer"]})
    for oid, _, text, pattern, calls, answer, _ in OBS:
        rules.append({"id": oid, "pattern": pattern, "branch": "monitoring", "calls": calls, "answer": answer})
    for oid, topic, text, _, _, _, rubric in OBS:
        queries.append({"id": oid, "category": "observability", "topic": topic, "text": text, "rubric": rubric})
    for c in CONTROL:
        q = {"id": c["id"], "category": "control", "topic": "actions", "text": c["text"], "expectation": c["expect"]}
        if c.get("setup"):
            q["setup"] = c["setup"]
        queries.append(q)
    suite = {"name": "ran-operator-50",
             "description": "Reconstructed 50-query suite: 40 observability queries and 10 control actions "
                            "over the data/fixture.json deployment.",
             "queries": queries}
    (root / "suite.json").write_text(json.dumps(suite, indent=2) + "\n")
    (root / "rules.json").write_text(json.dumps({"metadata": {"deployment": "local"}, "rules": rules}, indent=2) + "\n")
    print(len(queries), "queries,", len(rules), "rules")


if __name__ == "__main__":
    main()
