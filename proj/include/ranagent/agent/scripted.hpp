#pragma once

#include <regex>
#include <string>
#include <vector>

#include "ranagent/agent/backend.hpp"

namespace ranagent::agent {

/// Deterministic rule-table backend. Each rule maps a prompt pattern to a
/// branch, a sequence of tool calls and an answer template. The backend is
/// stateless: progress through the call sequence is read back from the
/// transcript history.
///
/// Rule file: {"rules": [{"id", "pattern", "branch", "calls": [{"tool",
/// "arguments"}], "answer"}]}. Argument strings may use "$1".."$9" for
/// pattern captures (lowercased); a ":int" or ":num" suffix converts the
/// result.
/// Answer templates use the same captures plus
///   {N:path|filter...}        value from the N-th completed call's output
///   {hit:Kind/name:field}     "field=value" read from a retrieval hit
/// with filters count, names, field:<key>, where:<key>=<value>, flat, first,
/// join, yesno.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(const json& rules, std::string name = "scripted");
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path, std::string name = "scripted");

  const BackendProfile& profile() const override { return profile_; }
  std::string complete(const json& transcript) override;
  void set_metadata(json metadata) { profile_.metadata = std::move(metadata); }

  static constexpr const char* kUnknownIntent = "cannot interpret intent";

 private:
  struct Rule {
    std::string id;
    std::regex pattern;
    std::string branch;
    std::vector<json> calls;
    std::string answer;
  };

  const Rule* match(const std::string& prompt, std::smatch& m) const;

  BackendProfile profile_;
  std::vector<Rule> rules_;
};

/// Expands "$N" captures in a string.
std::string expand_captures(const std::string& text, const std::vector<std::string>& captures);

/// Renders an answer template against call outputs and retrieval hits.
std::string render_template(const std::string& tmpl, const std::vector<json>& outputs, const json& hits);

}  // namespace ranagent::agent
