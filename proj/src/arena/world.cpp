#include "arena/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace predprey {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStraightTurnRate = 1e-9;
constexpr int kMaxPushIterations = 16;
constexpr double kOverlapSlack = 1e-12;
// Follow-up passes separate slightly past contact so jammed clusters settle
// within the iteration budget instead of creeping towards it.
constexpr double kSettleMargin = 1e-5;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kConfig, std::string("arena config: ") + what);
}

Pose clamp_into_arena(Pose p, const ArenaConfig& c) {
  const double lo = c.robot_body_radius;
  const double hi = c.side_length - c.robot_body_radius;
  p.x = std::clamp(p.x, lo, hi);
  p.y = std::clamp(p.y, lo, hi);
  return p;
}

// Separates two discs along their center line; returns false when they do not
// overlap.
bool push_apart(Pose& a, Pose& b, double contact, bool with_margin, const ArenaConfig& config) {
  double nx = b.x - a.x;
  double ny = b.y - a.y;
  const double d = std::hypot(nx, ny);
  if (d >= contact - kOverlapSlack) return false;
  if (d < 1e-12) {
    nx = 1.0;
    ny = 0.0;
  } else {
    nx /= d;
    ny /= d;
  }
  const double overlap = contact + (with_margin ? kSettleMargin : 0.0) - d;
  const double half = overlap / 2.0;
  Pose na = clamp_into_arena({a.x - nx * half, a.y - ny * half, a.theta}, config);
  Pose nb = clamp_into_arena({b.x + nx * half, b.y + ny * half, b.theta}, config);
  // A disc blocked by a wall hands its share of the push to the other one.
  const double moved_a = (a.x - na.x) * nx + (a.y - na.y) * ny;
  const double moved_b = (nb.x - b.x) * nx + (nb.y - b.y) * ny;
  const double shortfall = overlap - moved_a - moved_b;
  if (shortfall > 0.0) {
    if (moved_a < moved_b) {
      nb = clamp_into_arena({nb.x + nx * shortfall, nb.y + ny * shortfall, nb.theta}, config);
    } else {
      na = clamp_into_arena({na.x - nx * shortfall, na.y - ny * shortfall, na.theta}, config);
    }
  }
  a = na;
  b = nb;
  return true;
}

}  // namespace

void ArenaConfig::validate() const {
  require(side_length > 0.0, "side_length must be > 0");
  require(robot_body_radius > 0.0, "robot_body_radius must be > 0");
  require(2.0 * robot_body_radius < side_length, "robot must fit inside the arena");
  require(wheel_radius > 0.0, "wheel_radius must be > 0");
  require(axle_length > 0.0, "axle_length must be > 0");
  require(omega_max > 0.0, "omega_max must be > 0");
  require(dt > 0.0, "dt must be > 0");
  require(episode_time > 0.0, "episode_time must be > 0");
  require(catch_radius > 0.0, "catch_radius must be > 0");
  require(ir_range > 0.0, "ir_range must be > 0");
  const double ticks = episode_time / dt;
  require(std::abs(ticks - std::round(ticks)) < 1e-9 && std::round(ticks) >= 1.0,
          "episode_time must be an integer multiple of dt");
}

int ArenaConfig::total_ticks() const { return static_cast<int>(std::lround(episode_time / dt)); }

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

double distance(const Pose& a, const Pose& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Pose step_kinematics(const Pose& pose, const WheelCommand& cmd, const ArenaConfig& config) {
  const double v = config.wheel_radius * (cmd.omega_left + cmd.omega_right) / 2.0;
  const double w = config.wheel_radius * (cmd.omega_right - cmd.omega_left) / config.axle_length;
  const double dt = config.dt;
  Pose out = pose;
  if (std::abs(w) < kStraightTurnRate) {
    out.x += v * std::cos(pose.theta) * dt;
    out.y += v * std::sin(pose.theta) * dt;
    out.theta = normalize_angle(pose.theta + w * dt);
    return out;
  }
  const double radius = v / w;
  const double heading_end = pose.theta + w * dt;
  out.x += radius * (std::sin(heading_end) - std::sin(pose.theta));
  out.y -= radius * (std::cos(heading_end) - std::cos(pose.theta));
  out.theta = normalize_angle(heading_end);
  return out;
}

WorldState resolve_collisions(WorldState state, const ArenaConfig& config) {
  std::array<Pose*, kPredatorCount + 1> bodies{};
  for (int i = 0; i < kPredatorCount; ++i) bodies[i] = &state.predators[i].pose;
  bodies[kPredatorCount] = &state.prey.pose;

  constexpr std::array<std::pair<int, int>, 6> pairs{
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  const double contact = 2.0 * config.robot_body_radius;
  for (int iter = 0; iter < kMaxPushIterations; ++iter) {
    for (Pose* p : bodies) *p = clamp_into_arena(*p, config);
    bool pushed = false;
    // Forward then backward over the pairs so push chains propagate both ways.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[sweep == 0 ? k : pairs.size() - 1 - k];
        pushed |= push_apart(*bodies[i], *bodies[j], contact, iter > 0 || sweep > 0, config);
      }
    }
    if (!pushed) break;
  }
  for (Pose* p : bodies) *p = clamp_into_arena(*p, config);
  return state;
}

CatchResult check_catch(const WorldState& state, const ArenaConfig& config) {
  CatchResult result;
  result.distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kPredatorCount; ++i) {
    const double d = distance(state.predators[i].pose, state.prey.pose);
    if (d < result.distance) {
      result.distance = d;
      result.predator = i;
    }
  }
  result.caught = result.distance <= config.catch_radius;
  if (!result.caught) result.predator = -1;
  return result;
}

WorldState initial_placement(const ArenaConfig& config, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x706c6163656d656eULL}));
  WorldState state;
  const double side = config.side_length;
  // uniform() is in [0, 1), so the heading lands in (-pi, pi].
  state.prey.pose = {side / 2.0, side / 2.0, kPi - 2.0 * kPi * rng.uniform()};
  const double wall_offset = 0.3;
  for (int i = 0; i < kPredatorCount; ++i) {
    state.predators[i].pose = {side * (i + 1) / 4.0, wall_offset, kPi / 2.0};
  }
  return state;
}

WheelCommand clamp_command(WheelCommand cmd, const ArenaConfig& config) {
  cmd.omega_left = std::clamp(cmd.omega_left, -config.omega_max, config.omega_max);
  cmd.omega_right = std::clamp(cmd.omega_right, -config.omega_max, config.omega_max);
  return cmd;
}

}  // namespace predprey
