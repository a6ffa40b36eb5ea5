#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace predprey {

inline constexpr int kPredatorCount = 3;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]

  bool operator==(const Pose&) const = default;
};

struct WheelCommand {
  double omega_left = 0.0;   // rad/s
  double omega_right = 0.0;  // rad/s
};

struct ArenaConfig {
  double side_length = 4.0;
  double robot_body_radius = 0.10;
  double wheel_radius = 0.035;
  double axle_length = 0.18;
  double omega_max = 15.0;
  double dt = 0.1;
  double episode_time = 30.0;
  double catch_radius = 0.30;
  double ir_range = 0.20;

  // Throws Error(kConfig) when an invariant does not hold.
  void validate() const;
  // Number of control ticks in a full episode (episode_time / dt).
  int total_ticks() const;
  double max_linear_speed() const { return omega_max * wheel_radius; }
};

struct Robot {
  Pose pose;
  WheelCommand command;
};

struct WorldState {
  int tick = 0;
  std::array<Robot, kPredatorCount> predators{};
  Robot prey;
  bool caught = false;
  std::optional<double> catch_time;
};

struct CatchResult {
  bool caught = false;
  int predator = -1;
  double distance = 0.0;  // of the closest predator
};

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

double distance(const Pose& a, const Pose& b);

// Exact differential-drive integration over config.dt. No wall handling.
Pose step_kinematics(const Pose& pose, const WheelCommand& cmd, const ArenaConfig& config);

// Clamps every body disc into the arena and pushes overlapping discs apart
// along their center line. Headings are untouched.
WorldState resolve_collisions(WorldState state, const ArenaConfig& config);

CatchResult check_catch(const WorldState& state, const ArenaConfig& config);

WorldState initial_placement(const ArenaConfig& config, std::uint64_t seed);

// Clamps a wheel command into [-omega_max, omega_max].
WheelCommand clamp_command(WheelCommand cmd, const ArenaConfig& config);

}  // namespace predprey
