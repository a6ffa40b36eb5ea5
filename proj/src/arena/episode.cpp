#include "arena/episode.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>

#include "common/error.hpp"

namespace predprey {

Policy network_policy(const neat::Genome& genome) {
  auto net = std::make_shared<const neat::Network>(genome);
  return [net](std::span<const double> inputs) {
    std::array<double, 2> out{};
    net->activate(inputs, out);
    return out;
  };
}

Policy constant_policy(double left, double right) {
  return [left, right](std::span<const double>) { return std::array<double, 2>{left, right}; };
}

WheelCommand to_wheel_command(const std::array<double, 2>& normalized, const ArenaConfig& config) {
  return clamp_command({normalized[0] * config.omega_max, normalized[1] * config.omega_max}, config);
}

CatchResult advance_world(WorldState& state, const std::array<WheelCommand, kPredatorCount>& predators,
                          const WheelCommand& prey, const ArenaConfig& config) {
  for (int i = 0; i < kPredatorCount; ++i) {
    state.predators[i].command = clamp_command(predators[i], config);
    state.predators[i].pose = step_kinematics(state.predators[i].pose, state.predators[i].command, config);
  }
  state.prey.command = clamp_command(prey, config);
  state.prey.pose = step_kinematics(state.prey.pose, state.prey.command, config);
  state = resolve_collisions(std::move(state), config);
  ++state.tick;
  const CatchResult c = check_catch(state, config);
  if (c.caught && !state.caught) {
    state.caught = true;
    state.catch_time = state.tick == config.total_ticks() ? config.episode_time : state.tick * config.dt;
  }
  return c;
}

TrajectoryFrame snapshot(const WorldState& state) {
  TrajectoryFrame f;
  f.tick = state.tick;
  f.prey = state.prey.pose;
  for (int i = 0; i < kPredatorCount; ++i) f.predators[i] = state.predators[i].pose;
  return f;
}

EpisodeOutcome run_episode(const std::array<Policy, kPredatorCount>& predators, const Policy& prey,
                           const ArenaConfig& config, const CameraModel& camera, std::uint64_t seed) {
  WorldState state = initial_placement(config, seed);
  const int ticks = config.total_ticks();
  EpisodeOutcome outcome;
  outcome.trajectory.reserve(static_cast<std::size_t>(ticks) + 1);
  outcome.trajectory.push_back(snapshot(state));

  std::array<WheelCommand, kPredatorCount> commands{};
  CatchResult result;
  while (state.tick < ticks) {
    for (int i = 0; i < kPredatorCount; ++i) {
      const auto inputs = predator_observe(state, i, config, camera).as_inputs();
      commands[i] = to_wheel_command(predators[i](inputs), config);
    }
    const auto prey_inputs = omniscient_observe(state, config).as_inputs();
    const WheelCommand prey_cmd = to_wheel_command(prey(prey_inputs), config);
    result = advance_world(state, commands, prey_cmd, config);
    outcome.trajectory.push_back(snapshot(state));
    if (result.caught) break;
  }
  outcome.caught = state.caught;
  outcome.catcher = result.caught ? result.predator : -1;
  outcome.t = state.caught ? *state.catch_time : config.episode_time;
  for (int i = 0; i < kPredatorCount; ++i) {
    outcome.final_distances[i] = distance(state.predators[i].pose, state.prey.pose);
  }
  return outcome;
}

void check_controller_arity(const neat::Genome& genome, int inputs, const std::string& who) {
  if (genome.input_arity != inputs || genome.output_arity != kWheelOutputs) {
    throw Error(ErrorCode::kArity, who + " genome has arity " + std::to_string(genome.input_arity) +
                                       "->" + std::to_string(genome.output_arity) + ", expected " +
                                       std::to_string(inputs) + "->" + std::to_string(kWheelOutputs));
  }
}

EpisodeOutcome run_episode(const std::array<const neat::Genome*, kPredatorCount>& predators,
                           const neat::Genome& prey, const ArenaConfig& config,
                           const CameraModel& camera, std::uint64_t seed) {
  std::array<Policy, kPredatorCount> policies;
  for (int i = 0; i < kPredatorCount; ++i) {
    check_controller_arity(*predators[i], kPredatorInputs, "predator " + std::to_string(i));
    policies[i] = network_policy(*predators[i]);
  }
  check_controller_arity(prey, kPreyInputs, "prey");
  return run_episode(policies, network_policy(prey), config, camera, seed);
}

std::string trajectory_header() {
  std::string h = "tick,prey_x,prey_y,prey_theta";
  for (int i = 0; i < kPredatorCount; ++i) {
    const std::string p = "pred" + std::to_string(i);
    h += "," + p + "_x," + p + "_y," + p + "_theta";
  }
  return h;
}

void write_trajectory(std::ostream& out, std::span<const TrajectoryFrame> frames) {
  out << trajectory_header() << '\n';
  char buf[64];
  auto put = [&](const Pose& p) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", p.x, p.y, p.theta);
    out << buf;
  };
  for (const auto& f : frames) {
    out << f.tick;
    put(f.prey);
    for (const auto& p : f.predators) put(p);
    out << '\n';
  }
}

void write_trajectory_file(const std::string& path, std::span<const TrajectoryFrame> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_trajectory(out, frames);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace predprey
