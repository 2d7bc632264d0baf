#include "ranagent/eval/judge.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::eval {

namespace {

std::string render_fact(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

Fact make_fact(std::string label, const json& v) {
  Fact f;
  f.label = std::move(label);
  f.expected = render_fact(v);
  if (v.is_number()) f.number = v.get<double>();
  return f;
}

bool where_matches(const json& spec, const json& where) {
  if (where.is_null()) return true;
  const auto field = where.at("field").get<std::string>();
  const json* v = find_path(spec, field);
  if (!v) return false;
  if (where.contains("equals")) return *v == where["equals"];
  if (where.contains("contains")) {
    if (!v->is_array()) return false;
    return std::find(v->begin(), v->end(), where["contains"]) != v->end();
  }
  throw Error(ErrorCode::kValidation, "where: needs equals or contains");
}

std::vector<store::Resource> select(platform::Platform& p, const json& spec) {
  const auto kind = store::parse_kind(spec.at("kind").get<std::string>());
  const json where = spec.value("where", json());
  std::vector<store::Resource> out;
  for (auto& r : p.store().list(kind))
    if (where_matches(r.spec, where)) out.push_back(std::move(r));
  return out;
}

double metric_of(const netsim::KpiSample& s, const std::string& metric) {
  if (metric == "throughput_mbps") return s.throughput_mbps;
  if (metric == "latency_ms") return s.latency_ms;
  if (metric == "prb_used") return s.prb_used;
  throw Error(ErrorCode::kValidation, "unknown KPI metric '" + metric + "'");
}

bool boundary(const std::string& s, std::size_t pos) {
  return pos >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos]));
}

std::vector<double> numbers_in(const std::string& text) {
  // Numbers standing alone: not part of identifiers like gnb1 or v7.
  static const std::regex re(R"((?:^|[^\w.\-])(\d+(?:\.\d+)?))");
  std::vector<double> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
    out.push_back(std::stod((*it)[1].str()));
  return out;
}

}  // namespace

json to_json(const Fact& f) {
  json out = {{"label", f.label}, {"expected", f.expected}};
  if (f.number) out["number"] = *f.number;
  return out;
}

std::vector<Fact> resolve_rubric(const json& rubric, platform::Platform& p) {
  std::vector<Fact> facts;
  for (const auto& entry : rubric) {
    if (!entry.is_object() || entry.size() != 1)
      throw Error(ErrorCode::kValidation, "rubric entry must be an object with one key: " + entry.dump());
    const auto& [type, spec] = *entry.items().begin();
    if (type == "literal") {
      facts.push_back(make_fact("literal", spec));
    } else if (type == "count") {
      facts.push_back(make_fact("count " + spec.at("kind").get<std::string>(), select(p, spec).size()));
    } else if (type == "names") {
      for (const auto& r : select(p, spec))
        facts.push_back(make_fact("name " + spec.at("kind").get<std::string>(), r.name));
    } else if (type == "field") {
      const auto kind = store::parse_kind(spec.at("kind").get<std::string>());
      const auto name = spec.at("name").get<std::string>();
      const auto path = spec.at("path").get<std::string>();
      const auto r = p.store().find(kind, name);
      if (!r) throw Error(ErrorCode::kNotFound, "rubric: no " + std::string(store::to_string(kind)) + "/" + name);
      const std::string label = std::string(store::to_string(kind)) + "/" + name + ":" + path;
      if (path == "$version") {
        facts.push_back(make_fact(label, "v" + std::to_string(r->version)));
        continue;
      }
      const json* v = find_path(r->spec, path);
      if (!v) throw Error(ErrorCode::kNotFound, "rubric: " + label + " not set");
      if (v->is_array()) {
        const auto pluck = spec.value("pluck", std::string());
        for (const auto& x : *v) {
          if (pluck.empty()) {
            facts.push_back(make_fact(label, x));
          } else if (x.contains(pluck)) {
            facts.push_back(make_fact(label + "." + pluck, x[pluck]));
          }
        }
      } else {
        facts.push_back(make_fact(label, *v));
      }
    } else if (type == "kpi") {
      const auto scope = spec.at("scope").get<std::string>();
      const auto metric = spec.at("metric").get<std::string>();
      const auto latest = p.sim().latest(scope);
      if (!latest) throw Error(ErrorCode::kNotFound, "rubric: no KPI samples for " + scope);
      double value = metric_of(*latest, metric);
      if (spec.contains("window")) {
        const auto window = spec["window"].get<std::int64_t>();
        const auto series = p.sim().series(scope, latest->timestamp - window + 1, latest->timestamp);
        double sum = 0;
        for (const auto& s : series) sum += metric_of(s, metric);
        value = series.empty() ? 0.0 : sum / static_cast<double>(series.size());
      }
      facts.push_back(make_fact("kpi " + scope + " " + metric, value));
    } else if (type == "log") {
      const auto resource = spec.at("resource").get<std::string>();
      const auto tail = p.logs().tail(resource, 1);
      if (tail.empty()) throw Error(ErrorCode::kNotFound, "rubric: no log lines for " + resource);
      facts.push_back(make_fact("log " + resource, tail.back().message));
    } else if (type == "log_count") {
      const auto level = spec.at("level").get<std::string>();
      const auto entries = p.logs().tail("", spec.value("limit", std::size_t{50}));
      const auto n = std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.level == level; });
      facts.push_back(make_fact("log_count " + level, n));
    } else {
      throw Error(ErrorCode::kValidation, "unknown rubric entry '" + type + "'");
    }
  }
  return facts;
}

bool fact_matches(const std::string& answer, const Fact& fact) {
  if (fact.number) {
    for (double v : numbers_in(answer))
      if (std::fabs(v - *fact.number) <= 0.005 + 1e-9) return true;
    return false;
  }
  const auto hay = to_lower(answer);
  const auto needle = to_lower(trim(fact.expected));
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(hay[pos - 1]));
    if (left && boundary(hay, pos + needle.size())) return true;
  }
  return false;
}

double coherence_judge(const std::string& answer, const std::vector<Fact>& facts) {
  if (trim(answer).empty() || facts.empty()) return 0.0;
  std::size_t matched = 0;
  for (const auto& f : facts) matched += fact_matches(answer, f) ? 1 : 0;
  return 5.0 * static_cast<double>(matched) / static_cast<double>(facts.size());
}

Verdict RubricJudge::score(const std::string&, const std::string& answer, const std::vector<Fact>& facts) {
  Verdict v;
  v.score = coherence_judge(answer, facts);
  for (const auto& f : facts) {
    if (!trim(answer).empty() && fact_matches(answer, f)) ++v.matched;
    else v.missing.push_back(f.label + " = " + f.expected);
  }
  return v;
}

ExternalJudge::ExternalJudge(std::string endpoint, std::string model, std::string api_key, int timeout_ms)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)), timeout_ms_(timeout_ms) {}

Verdict ExternalJudge::score(const std::string& question, const std::string& answer, const std::vector<Fact>& facts) {
  Verdict v;
  if (trim(answer).empty()) return v;
  json fact_list = json::array();
  for (const auto& f : facts) fact_list.push_back(f.label + " = " + f.expected);
  const std::string instructions =
      "Score the answer to an operator question about a radio access network on a 0-5 scale. "
      "Judge factual agreement with the reference facts, completeness and clarity. "
      "Reply with the score only.";
  const json user = {{"question", question}, {"answer", answer}, {"reference_facts", fact_list}};
  const json body = {{"model", model_},
                     {"temperature", 0.0},
                     {"messages", json::array({{{"role", "system"}, {"content", instructions}},
                                               {{"role", "user"}, {"content", user.dump()}}})}};
  const auto scheme_end = endpoint_.find("://");
  const auto path_start = scheme_end == std::string::npos ? std::string::npos : endpoint_.find('/', scheme_end + 3);
  if (path_start == std::string::npos) throw Error(ErrorCode::kUsage, "judge endpoint must be http(s)://host/path");
  httplib::Client cli(endpoint_.substr(0, path_start));
  cli.set_read_timeout(std::chrono::milliseconds(timeout_ms_));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = cli.Post(endpoint_.substr(path_start), headers, body.dump(), "application/json");
  if (!res || res->status != 200) throw Error(ErrorCode::kBackend, "judge request failed");
  const auto reply = json::parse(res->body, nullptr, false);
  const json* content = nullptr;
  if (!reply.is_discarded() && reply.contains("choices") && reply["choices"].is_array() && !reply["choices"].empty())
    content = find_path(reply["choices"][0], "message.content");
  if (!content || !content->is_string()) throw Error(ErrorCode::kBackend, "judge reply has no content");
  static const std::regex num(R"((\d+(?:\.\d+)?))");
  std::smatch m;
  const auto text = content->get<std::string>();
  if (!std::regex_search(text, m, num)) throw Error(ErrorCode::kBackend, "judge reply has no score");
  v.score = std::clamp(std::stod(m[1].str()), 0.0, 5.0);
  for (const auto& f : facts)
    if (fact_matches(answer, f)) ++v.matched;
  return v;
}

}  // namespace ranagent::eval
