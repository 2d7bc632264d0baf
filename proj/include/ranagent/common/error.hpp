#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ranagent {

enum class ErrorCode {
  kValidation,
  kNotFound,
  kAlreadyExists,
  kDependency,
  kAdmission,
  kIntegrity,
  kCompaction,
  kOverflow,
  kUnknownKind,
  kToolNotFound,
  kArgument,
  kBackend,
  kPersistence,
  kUsage,
};

std::string_view to_string(ErrorCode code);

// Every module reports failures through this type; `code` is what callers
// branch on, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ranagent
