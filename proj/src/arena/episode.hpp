#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "arena/world.hpp"
#include "neat/genome.hpp"
#include "sensors/sensors.hpp"

namespace predprey {

// Maps an observation to normalized wheel outputs in [-1, 1] (left, right).
using Policy = std::function<std::array<double, 2>(std::span<const double>)>;

inline constexpr int kPredatorInputs = 3;
inline constexpr int kPreyInputs = 8;
inline constexpr int kWheelOutputs = 2;

struct TrajectoryFrame {
  int tick = 0;
  Pose prey;
  std::array<Pose, kPredatorCount> predators{};

  bool operator==(const TrajectoryFrame&) const = default;
};

struct EpisodeOutcome {
  bool caught = false;
  double t = 0.0;  // catch time, or episode_time on timeout
  int catcher = -1;
  std::array<double, kPredatorCount> final_distances{};
  std::vector<TrajectoryFrame> trajectory;
};

Policy network_policy(const neat::Genome& genome);

// A policy that ignores its inputs.
Policy constant_policy(double left, double right);

WheelCommand to_wheel_command(const std::array<double, 2>& normalized, const ArenaConfig& config);

// One synchronous control tick: every robot moves from the same pre-step
// state, collisions are resolved, then the catch condition is evaluated and
// recorded in the state.
CatchResult advance_world(WorldState& state, const std::array<WheelCommand, kPredatorCount>& predators,
                          const WheelCommand& prey, const ArenaConfig& config);

TrajectoryFrame snapshot(const WorldState& state);

EpisodeOutcome run_episode(const std::array<Policy, kPredatorCount>& predators, const Policy& prey,
                           const ArenaConfig& config, const CameraModel& camera, std::uint64_t seed);

// Throws Error(kArity) naming the genome whose arity is wrong.
EpisodeOutcome run_episode(const std::array<const neat::Genome*, kPredatorCount>& predators,
                           const neat::Genome& prey, const ArenaConfig& config,
                           const CameraModel& camera, std::uint64_t seed);

void check_controller_arity(const neat::Genome& genome, int inputs, const std::string& who);

// CSV, one line per tick: tick, then x,y,theta for the prey and predators 0..2.
void write_trajectory(std::ostream& out, std::span<const TrajectoryFrame> frames);
void write_trajectory_file(const std::string& path, std::span<const TrajectoryFrame> frames);
std::string trajectory_header();

}  // namespace predprey
