#include "ranagent/common/error.hpp"

namespace ranagent {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kAlreadyExists: return "already-exists";
    case ErrorCode::kDependency: return "dependency";
    case ErrorCode::kAdmission: return "admission";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kCompaction: return "compaction";
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kUnknownKind: return "unknown-kind";
    case ErrorCode::kToolNotFound: return "tool-not-found";
    case ErrorCode::kArgument: return "argument";
    case ErrorCode::kBackend: return "backend";
    case ErrorCode::kPersistence: return "persistence";
    case ErrorCode::kUsage: return "usage";
  }
  return "unknown";
}

}  // namespace ranagent
