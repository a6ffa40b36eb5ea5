#pragma once

// Reference computations used only by tests. They deliberately avoid the
// library's own integration and geometry code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "arena/world.hpp"

namespace oracle {

inline predprey::Pose euler_step(predprey::Pose p, predprey::WheelCommand cmd,
                                 const predprey::ArenaConfig& c, double h) {
  const double v = c.wheel_radius * (cmd.omega_left + cmd.omega_right) / 2.0;
  const double w = c.wheel_radius * (cmd.omega_right - cmd.omega_left) / c.axle_length;
  const int steps = static_cast<int>(std::lround(c.dt / h));
  for (int k = 0; k < steps; ++k) {
    p.x += v * std::cos(p.theta) * h;
    p.y += v * std::sin(p.theta) * h;
    p.theta += w * h;
  }
  return p;
}

inline std::array<predprey::Pose, 4> bodies(const predprey::WorldState& s) {
  return {s.predators[0].pose, s.predators[1].pose, s.predators[2].pose, s.prey.pose};
}

inline double min_pairwise_distance(const predprey::WorldState& s) {
  const auto b = bodies(s);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      best = std::min(best, std::sqrt((b[i].x - b[j].x) * (b[i].x - b[j].x) +
                                      (b[i].y - b[j].y) * (b[i].y - b[j].y)));
    }
  }
  return best;
}

inline bool contained(const predprey::WorldState& s, const predprey::ArenaConfig& c, double tol) {
  for (const auto& p : bodies(s)) {
    const double r = c.robot_body_radius;
    if (p.x < r - tol || p.x > c.side_length - r + tol) return false;
    if (p.y < r - tol || p.y > c.side_length - r + tol) return false;
  }
  return true;
}

// First tick at which a robot driving straight at full speed closes `gap`
// meters down to the catch radius.
inline int straight_catch_tick(double gap, const predprey::ArenaConfig& c) {
  const double per_tick = c.omega_max * c.wheel_radius * c.dt;
  int k = 0;
  double remaining = gap;
  while (remaining > c.catch_radius) {
    remaining -= per_tick;
    ++k;
  }
  return k;
}

}  // namespace oracle
