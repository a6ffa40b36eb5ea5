#include "common/error.hpp"

namespace predprey {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "E_CONFIG";
    case ErrorCode::kResumeMismatch: return "E_RESUME_MISMATCH";
    case ErrorCode::kInventory: return "E_INVENTORY";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kMalformed: return "E_MALFORMED";
    case ErrorCode::kInvariant: return "E_INVARIANT";
    case ErrorCode::kArity: return "E_ARITY";
    case ErrorCode::kPortInUse: return "E_PORT_IN_USE";
    case ErrorCode::kLocked: return "E_LOCKED";
    case ErrorCode::kArgument: return "E_ARGUMENT";
    case ErrorCode::kGeneration: return "E_GENERATION";
    case ErrorCode::kTrial: return "E_TRIAL";
    case ErrorCode::kInternal: return "E_INTERNAL";
  }
  return "E_UNKNOWN";
}

}  // namespace predprey
