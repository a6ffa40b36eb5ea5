#pragma once

#include <cstdint>
#include <string>

#include "coevo/coevo.hpp"

namespace predprey {

// Everything a run needs. The [run] section (output directory, threads) does
// not affect results and is excluded from the config hash.
struct RunConfig {
  Environment env;
  std::string output_dir = "runs/default";
  unsigned threads = 1;

  void validate() const;
};

// Published defaults.
RunConfig default_run_config();
// Small profile for CI: 10 generations, population 8, K = 3.
RunConfig smoke_run_config();

// Line-oriented `key = value` text with [sections]; '#' and ';' start comment
// lines. Missing keys keep their defaults. Throws Error(kConfig) with
// "<source>:<line>: ..." diagnostics.
RunConfig parse_run_config(const std::string& text, const std::string& source = "config");
RunConfig load_run_config(const std::string& path);

// Canonical text: every key, fixed order, doubles printed round-trip exact.
// Run directories store the snapshot without the [run] section so that
// artifacts do not depend on where or how wide a run executed.
std::string emit_run_config(const RunConfig& config, bool include_run_section = true);

// FNV-1a over the canonical text minus the [run] section, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace predprey
