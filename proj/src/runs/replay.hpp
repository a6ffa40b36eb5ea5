#pragma once

#include <string>
#include <vector>

#include "arena/episode.hpp"

namespace predprey {

// Parses a trajectory file in the export format. Error(kMalformed) with the
// line number on any format problem, including an empty file.
std::vector<TrajectoryFrame> read_trajectory(const std::string& path);
std::vector<TrajectoryFrame> parse_trajectory(const std::string& text, const std::string& source);

struct ReplayReport {
  int ticks = 0;  // last tick in the file
  bool caught = false;
  double t = 0.0;
  int catcher = -1;
  std::string summary;  // "valid, caught at t=..." / "valid, not caught (t=...)"
};

// Re-checks containment, non-overlap and catch consistency (a catch ends the
// trajectory; a trajectory may end early only on a catch). Tolerances account
// for the 6-decimal export rounding. Violations throw Error(kInvariant) naming
// the tick. If an index.csv sits next to the file and lists it, the outcome
// must match that row.
ReplayReport replay_trajectory(const std::string& path, const ArenaConfig& config = {});

}  // namespace predprey
