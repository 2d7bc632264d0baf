#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ranagent/agent/graph.hpp"
#include "ranagent/eval/judge.hpp"
#include "ranagent/eval/metrics.hpp"
#include "ranagent/netsim/types.hpp"
#include "ranagent/tools/registry.hpp"

namespace ranagent::eval {

enum class Category { kObservability, kControl };
std::string_view to_string(Category c);

struct EvalQuery {
  std::string id;
  Category category = Category::kObservability;
  std::string topic;
  std::string text;
  json rubric = json::array();                   ///< observability
  std::vector<tools::Expectation> expectation;   ///< control
  json setup = json::array();                    ///< control: deployment calls applied before the episode
};

struct Suite {
  std::string name;
  std::string description;
  std::vector<EvalQuery> queries;

  std::size_t count(Category c) const;
};

/// Throws Error{kUsage} when the file is missing, kValidation when malformed
/// (duplicate ids, empty rubric, control query without expectation).
Suite load_suite(const std::string& path);
Suite suite_from_json(const json& doc);

struct QueryRow {
  std::string id;
  Category category = Category::kObservability;
  std::string text;
  std::string answer;
  std::string branch;
  int steps = 0;
  double e2e_ms = 0.0;
  std::optional<double> inference_ms_mean;
  int inference_calls = 0;
  std::optional<double> tta_ms;
  bool failed = false;
  bool exhausted = false;
  std::string error;
  std::optional<double> coherence;        ///< observability only
  std::vector<Fact> facts;
  std::vector<std::string> missing_facts;
  std::optional<bool> action_ok;          ///< control only
  json actions = json::array();
};

struct EvalReport {
  std::string backend;
  json backend_metadata = json::object();
  std::string judge;
  bool judge_deterministic = true;
  std::optional<double> coherence_mean;
  std::optional<double> coherence_std;
  std::optional<double> action_accuracy_pct;
  Summary e2e_ms;
  std::optional<double> inference_ms_mean;  ///< per backend call
  double steps_mean = 0.0;
  int steps_max = 0;
  std::vector<double> tta_samples_ms;
  std::vector<QueryRow> rows;
  std::size_t failed_queries = 0;
  std::size_t failed_controls = 0;  ///< control rows with action_ok false
};

json to_json(const QueryRow& row);
json to_json(const EvalReport& report);

struct RunOptions {
  agent::AgentOptions agent;
  /// Simulator ticks between observability queries on the shared fixture.
  std::int64_t ticks_between = 1;
  /// Control queries on worker threads. Latency figures are then not
  /// meaningful.
  bool parallel = false;
  Judge* judge = nullptr;  ///< RubricJudge when null
  agent::AnswerLog* answers = nullptr;
  std::function<void(const QueryRow&)> on_row;
};

/// Control queries each get a fresh deployment built from `scenario` plus
/// their setup calls; observability queries share one deployment that
/// keeps running between queries.
EvalReport run_suite(const Suite& suite, agent::Backend& backend, const netsim::SimState& scenario,
                     const RunOptions& options = {});

/// Text table with the columns Model, Observe Coherence, Action Accuracy,
/// E2E Latency (s), Inference (ms), Steps, VRAM (GB).
std::string render_table(const std::vector<EvalReport>& reports);

struct ReferenceRow {
  std::string model;
  std::optional<double> coherence_mean;
  std::optional<double> coherence_std;
  std::optional<double> action_accuracy_pct;
  std::optional<double> e2e_latency_s;
  std::optional<double> inference_ms;
  std::optional<double> steps;
  std::optional<double> vram_gb;
  std::string deployment;
};

std::vector<ReferenceRow> load_reference(const std::string& path);
/// Rows with coherence and latency, as Pareto points.
std::vector<ParetoPoint> reference_points(const std::vector<ReferenceRow>& rows);
/// Report as a reference row (for tables and Pareto plots mixing measured
/// and published figures).
ReferenceRow to_reference(const EvalReport& report);
std::string render_reference_table(const std::vector<ReferenceRow>& rows);

/// CSV "label,coherence,latency_s,deployment,vram_gb,frontier".
std::string pareto_csv(const std::vector<ParetoPoint>& points);
/// CSV "series,t_s,F" for each labelled sample set (seconds).
std::string cdf_csv(const std::vector<std::pair<std::string, std::vector<double>>>& series);

/// Reads a TTA baseline CSV with header "group,tta_s[,...]"; lines starting
/// with '#' are comments. Returns samples grouped by the first column.
std::vector<std::pair<std::string, std::vector<double>>> load_tta_baseline(const std::string& path);

}  // namespace ranagent::eval
