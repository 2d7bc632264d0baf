#include <cstdio>
#include <fstream>
#include <sstream>

#include "ranagent/common/error.hpp"
#include "ranagent/common/text.hpp"
#include "ranagent/eval/suite.hpp"

namespace ranagent::eval {

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_num(const json& doc, const char* key) {
  if (doc.contains(key) && doc[key].is_number()) return doc[key].get<double>();
  return std::nullopt;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // width counts code points so "±" lines up
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return s + std::string(width > cps ? width - cps : 0, ' ');
}

std::size_t cp_len(const std::string& s) {
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return cps;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

json to_json(const QueryRow& r) {
  json facts = json::array();
  for (const auto& f : r.facts) facts.push_back(to_json(f));
  return {{"id", r.id},
          {"category", to_string(r.category)},
          {"text", r.text},
          {"answer", r.answer},
          {"branch", r.branch},
          {"steps", r.steps},
          {"e2e_latency_ms", r.e2e_ms},
          {"inference_ms_mean", opt(r.inference_ms_mean)},
          {"inference_calls", r.inference_calls},
          {"tta_ms", opt(r.tta_ms)},
          {"failed", r.failed},
          {"exhausted", r.exhausted},
          {"error", r.error},
          {"coherence", opt(r.coherence)},
          {"facts", facts},
          {"missing_facts", r.missing_facts},
          {"action_ok", r.action_ok ? json(*r.action_ok) : json(nullptr)},
          {"actions", r.actions}};
}

json to_json(const EvalReport& r) {
  json rows = json::array();
  std::size_t obs = 0, ctl = 0;
  for (const auto& row : r.rows) {
    rows.push_back(to_json(row));
    (row.category == Category::kControl ? ctl : obs)++;
  }
  return {{"backend", r.backend},
          {"backend_metadata", r.backend_metadata},
          {"judge", {{"name", r.judge}, {"deterministic", r.judge_deterministic}}},
          {"queries", {{"total", r.rows.size()}, {"observability", obs}, {"control", ctl}}},
          {"coherence", {{"mean", opt(r.coherence_mean)}, {"std", opt(r.coherence_std)}, {"scale", "0-5"}}},
          {"action_accuracy_pct", opt(r.action_accuracy_pct)},
          {"e2e_latency_ms", to_json(r.e2e_ms)},
          {"inference_ms_mean", opt(r.inference_ms_mean)},
          {"inference_granularity", "wall time per backend call"},
          {"steps_mean", r.steps_mean},
          {"steps_max", r.steps_max},
          {"tta_samples_ms", r.tta_samples_ms},
          {"failed_queries", r.failed_queries},
          {"failed_controls", r.failed_controls},
          {"rows", rows}};
}

ReferenceRow to_reference(const EvalReport& r) {
  ReferenceRow row;
  row.model = r.backend;
  row.coherence_mean = r.coherence_mean;
  row.coherence_std = r.coherence_std;
  row.action_accuracy_pct = r.action_accuracy_pct;
  if (r.e2e_ms.n > 0) row.e2e_latency_s = r.e2e_ms.mean / 1000.0;
  row.inference_ms = r.inference_ms_mean;
  if (!r.rows.empty()) row.steps = r.steps_mean;
  row.vram_gb = opt_num(r.backend_metadata, "vram_gb");
  row.deployment = r.backend_metadata.value("deployment", std::string("local"));
  return row;
}

std::string render_reference_table(const std::vector<ReferenceRow>& rows) {
  const std::vector<std::string> head = {"Model",          "Observe Coherence", "Action Accuracy", "E2E Latency (s)",
                                         "Inference (ms)", "Steps",             "VRAM (GB)"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> c;
    c.push_back(r.model);
    if (r.coherence_mean)
      c.push_back(fmt("%.1f", *r.coherence_mean) + (r.coherence_std ? " ± " + fmt("%.1f", *r.coherence_std) : ""));
    else
      c.push_back("-");
    c.push_back(r.action_accuracy_pct ? fmt("%.0f %%", *r.action_accuracy_pct) : "-");
    c.push_back(r.e2e_latency_s ? fmt(*r.e2e_latency_s < 0.1 ? "%.3f" : "%.1f", *r.e2e_latency_s) : "-");
    c.push_back(r.inference_ms ? fmt(*r.inference_ms < 10 ? "%.2f" : "%.0f", *r.inference_ms) : "-");
    c.push_back(r.steps ? fmt("%.1f", *r.steps) : "-");
    c.push_back(r.vram_gb ? fmt("%.1f", *r.vram_gb) : (r.deployment == "cloud" ? "cloud" : "-"));
    cells.push_back(std::move(c));
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t i = 0; i < head.size(); ++i) {
    width[i] = cp_len(head[i]);
    for (const auto& c : cells) width[i] = std::max(width[i], cp_len(c[i]));
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? " | " : "") + pad(c[i], width[i]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  line(head);
  std::vector<std::string> rule;
  for (auto w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& c : cells) line(c);
  return out;
}

std::string render_table(const std::vector<EvalReport>& reports) {
  std::vector<ReferenceRow> rows;
  for (const auto& r : reports) rows.push_back(to_reference(r));
  return render_reference_table(rows);
}

std::vector<ReferenceRow> load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot open reference file " + path);
  const auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("rows")) throw Error(ErrorCode::kValidation, path + ": expected {\"rows\": [...]}");
  std::vector<ReferenceRow> out;
  for (const auto& r : doc["rows"]) {
    ReferenceRow row;
    row.model = r.at("model").get<std::string>();
    row.coherence_mean = opt_num(r, "coherence_mean");
    row.coherence_std = opt_num(r, "coherence_std");
    row.action_accuracy_pct = opt_num(r, "action_accuracy_pct");
    row.e2e_latency_s = opt_num(r, "e2e_latency_s");
    row.inference_ms = opt_num(r, "inference_ms");
    row.steps = opt_num(r, "steps");
    row.vram_gb = opt_num(r, "vram_gb");
    row.deployment = r.value("deployment", std::string("local"));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ParetoPoint> reference_points(const std::vector<ReferenceRow>& rows) {
  std::vector<ParetoPoint> out;
  for (const auto& r : rows) {
    if (!r.coherence_mean || !r.e2e_latency_s) continue;
    out.push_back({r.model, *r.coherence_mean, *r.e2e_latency_s, r.deployment, r.vram_gb});
  }
  return out;
}

std::string pareto_csv(const std::vector<ParetoPoint>& points) {
  const auto mask = pareto_mask(points);
  std::string out = "label,coherence,latency_s,deployment,vram_gb,frontier\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out += p.label + "," + fmt("%.6g", p.coherence) + "," + fmt("%.6g", p.latency_s) + "," + p.deployment + "," +
           (p.vram_gb ? fmt("%.6g", *p.vram_gb) : "") + "," + (mask[i] ? "1" : "0") + "\n";
  }
  return out;
}

std::string cdf_csv(const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  std::string out = "series,t_s,F\n";
  for (const auto& [label, samples] : series)
    for (const auto& pt : tta_cdf(samples)) out += label + "," + fmt("%.6g", pt.t) + "," + fmt("%.6g", pt.f) + "\n";
  return out;
}

std::vector<std::pair<std::string, std::vector<double>>> load_tta_baseline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot open baseline " + path);
  std::string line;
  int group_col = -1, tta_col = -1;
  std::vector<std::pair<std::string, std::vector<double>>> out;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split_csv(t);
    if (group_col < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "group") group_col = static_cast<int>(i);
        if (cells[i] == "tta_s") tta_col = static_cast<int>(i);
      }
      if (group_col < 0 || tta_col < 0) throw Error(ErrorCode::kValidation, path + ": header needs group and tta_s");
      continue;
    }
    if (static_cast<int>(cells.size()) <= std::max(group_col, tta_col))
      throw Error(ErrorCode::kValidation, path + ":" + std::to_string(lineno) + ": too few columns");
    double v = 0;
    try {
      v = std::stod(cells[static_cast<std::size_t>(tta_col)]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kValidation, path + ":" + std::to_string(lineno) + ": tta_s is not a number");
    }
    if (!(v >= 0)) throw Error(ErrorCode::kValidation, path + ":" + std::to_string(lineno) + ": negative tta_s");
    const auto& g = cells[static_cast<std::size_t>(group_col)];
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.first == g; });
    if (it == out.end()) {
      out.push_back({g, {}});
      it = std::prev(out.end());
    }
    it->second.push_back(v);
  }
  if (group_col < 0) throw Error(ErrorCode::kValidation, path + ": no header");
  return out;
}

}  // namespace ranagent::eval
