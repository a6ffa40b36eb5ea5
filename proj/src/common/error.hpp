#pragma once

#include <stdexcept>
#include <string>

namespace predprey {

// Mirrors pp_status in the C header; values must stay in sync.
enum class ErrorCode : int {
  kConfig = 1,
  kResumeMismatch = 2,
  kInventory = 3,
  kIo = 4,
  kMalformed = 5,
  kInvariant = 6,
  kArity = 7,
  kPortInUse = 8,
  kLocked = 9,
  kArgument = 10,
  kGeneration = 11,
  kTrial = 12,
  kInternal = 13,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace predprey
