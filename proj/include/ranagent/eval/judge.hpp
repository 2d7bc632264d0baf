#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"
#include "ranagent/platform/platform.hpp"

namespace ranagent::eval {

/// One required fact of a rubric, resolved against live state.
struct Fact {
  std::string label;     ///< where the value came from, e.g. "count Terminal"
  std::string expected;  ///< rendered value
  std::optional<double> number;
};

json to_json(const Fact& f);

/// Rubric entries (one key each):
///   {"literal": "text"}
///   {"count": {"kind", "where"?}}
///   {"names": {"kind", "where"?}}                 one fact per name
///   {"field": {"kind", "name", "path", "pluck"?}} arrays give one fact per element
///   {"kpi": {"scope", "metric", "window"?}}        latest value, or mean over window
///   {"log": {"resource"}}                          newest log message
///   {"log_count": {"level", "limit"}}
/// where = {"field", "equals" | "contains"}. Path "$version" gives "v<version>".
/// Throws Error{kValidation} on unknown entries and kNotFound when a named
/// resource is missing.
std::vector<Fact> resolve_rubric(const json& rubric, platform::Platform& platform);

/// Numeric facts match any number in the answer within 0.005; other facts
/// match as a case-insensitive substring on word boundaries.
bool fact_matches(const std::string& answer, const Fact& fact);

/// 5 * matched / total. Empty answer or empty fact list gives 0.
double coherence_judge(const std::string& answer, const std::vector<Fact>& facts);

struct Verdict {
  double score = 0.0;
  std::size_t matched = 0;
  std::vector<std::string> missing;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
  virtual Verdict score(const std::string& question, const std::string& answer, const std::vector<Fact>& facts) = 0;
};

class RubricJudge : public Judge {
 public:
  std::string name() const override { return "rubric"; }
  bool deterministic() const override { return true; }
  Verdict score(const std::string& question, const std::string& answer, const std::vector<Fact>& facts) override;
};

/// LLM-assisted judge over a chat-completions endpoint. Asks for a 0-5
/// score given the question, answer and the resolved facts. Not
/// deterministic; never used by acceptance checks.
class ExternalJudge : public Judge {
 public:
  ExternalJudge(std::string endpoint, std::string model, std::string api_key = {}, int timeout_ms = 60000);
  std::string name() const override { return "external:" + model_; }
  bool deterministic() const override { return false; }
  Verdict score(const std::string& question, const std::string& answer, const std::vector<Fact>& facts) override;

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
  int timeout_ms_;
};

}  // namespace ranagent::eval
