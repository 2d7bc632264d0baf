#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ranagent/agent/answer_log.hpp"
#include "ranagent/agent/backend.hpp"
#include "ranagent/common/clock.hpp"
#include "ranagent/platform/platform.hpp"
#include "ranagent/tools/registry.hpp"

namespace ranagent::agent {

enum class Branch { kMonitoring, kDeployment, kRetrieval };
enum class Node { kRouting, kRetrieve, kMonitoring, kDeployment, kValidate, kSaveAnswer };

std::string_view to_string(Branch b);
std::string_view to_string(Node n);
std::optional<Branch> parse_branch(std::string_view s);

struct Prompt {
  std::string id;
  std::string text;
  std::int64_t received_at_ms = 0;
  SteadyClock::time_point arrival;
};

/// Stamps arrival time. Throws Error{kValidation} for blank text.
Prompt make_prompt(std::string text, std::string id = {});

struct Step {
  int index = 0;
  Node node = Node::kRouting;
  json action;
  json observation;
  Duration elapsed{0};
  std::optional<Duration> inference;  ///< backend call time, when one was made
};

json to_json(const Step& step);

struct Episode {
  Prompt prompt;
  std::string backend;
  Branch branch = Branch::kMonitoring;
  std::vector<Step> steps;
  std::string answer;
  /// Executed actions (preflight passed). Emptied when a budget exhaustion
  /// rolls them back; the reverted ones move to `reverted`.
  std::vector<tools::ToolAction> actions;
  std::vector<tools::ToolAction> reverted;
  Duration e2e_latency{0};
  std::optional<Duration> tta;
  bool stopped = false;    ///< ended by a stop token
  bool exhausted = false;  ///< ran out of step budget
  bool failed = false;     ///< backend error or unrecoverable model output
  std::string error;
  std::string record_id;
  std::string persistence_error;

  std::vector<Duration> inference_times() const;
};

json to_json(const Episode& episode);

struct AgentOptions {
  int step_budget = 8;
  std::size_t top_k = 5;
  std::size_t hit_chars = 512;
  std::size_t keep_steps = 4;
};

/// Called with {"type": "episode_started" | "step" | "final_answer", ...}.
using EventSink = std::function<void(const json&)>;

/// Runs one prompt through routing -> retrieve -> branch loop ->
/// save_answer. Never throws for backend or tool failures; those end the
/// episode with `failed` set.
Episode run_episode(const Prompt& prompt, Backend& backend, platform::Platform& platform, AnswerLog* log,
                    const AgentOptions& options = {}, const EventSink& events = {});

/// Transcript pieces shared with backends and tests.
std::string system_preamble();
json render_tools(Branch branch);

}  // namespace ranagent::agent
