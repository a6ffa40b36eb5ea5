#pragma once

#include <array>
#include <numbers>

#include "arena/world.hpp"

namespace predprey {

struct CameraModel {
  double fov = std::numbers::pi / 3.0;
  double target_radius = 0.10;

  void validate() const;
};

// Egocentric predator inputs, in network order.
struct PredatorObservation {
  double x_image = 0.0;  // [-1, 1]; 0 when the prey is not visible
  double area = -1.0;    // [0, 1], or -1 when the prey is not visible
  double ir = -1.0;      // +1 obstacle within IR range, else -1

  std::array<double, 3> as_inputs() const { return {x_image, area, ir}; }
};

// Omniscient prey inputs, in network order:
// (dtheta_0..2, d_0..2, x, y), predators in fixed index order.
struct PreyObservation {
  std::array<double, kPredatorCount> dtheta{};  // angle / pi, (-1, 1]
  std::array<double, kPredatorCount> dist{};    // meters / side, [0, sqrt 2]
  double x = 0.0;                               // [-1, 1]
  double y = 0.0;                               // [-1, 1]

  std::array<double, 8> as_inputs() const {
    return {dtheta[0], dtheta[1], dtheta[2], dist[0], dist[1], dist[2], x, y};
  }
};

struct CameraReading {
  double x_image = 0.0;
  double area = -1.0;
};

// Bearing of `target` seen from `observer`, positive to the observer's right
// (image coordinates grow left to right).
double image_bearing(const Pose& observer, const Pose& target);

CameraReading camera_observe(const WorldState& state, int predator_index, const CameraModel& camera,
                             double body_radius);

// +1 if a wall or another robot lies within ir_range ahead of the body edge.
double ir_observe(const WorldState& state, int predator_index, const ArenaConfig& config);

PredatorObservation predator_observe(const WorldState& state, int predator_index,
                                     const ArenaConfig& config, const CameraModel& camera);

PreyObservation omniscient_observe(const WorldState& state, const ArenaConfig& config);

}  // namespace predprey
