#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "runs/config.hpp"

namespace predprey {

struct EvolveOptions {
  bool resume = false;
  // Stop cleanly after this many generations in this invocation (tests use it
  // to simulate an interruption).
  std::optional<int> stop_after;
  // Called after each completed generation with (generation, target).
  std::function<void(int, int)> progress;
};

struct EvolveResult {
  std::string run_dir;
  int generations_completed = 0;
  bool complete = false;
  bool interrupted = false;
};

// Runs (or resumes) coevolution into config.output_dir. Checkpoints after
// every generation. Errors: kIo, kLocked, kResumeMismatch, kArgument.
EvolveResult evolve_run(const RunConfig& config, const EvolveOptions& options = {});

// Asks a running evolve_run to stop at the next generation boundary. Safe to
// call from a signal handler.
void request_stop() noexcept;
void clear_stop_request() noexcept;
bool stop_requested() noexcept;

}  // namespace predprey
