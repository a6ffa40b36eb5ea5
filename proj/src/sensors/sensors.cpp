#include "sensors/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"

namespace predprey {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTangentSlack = 1e-12;

// True when the disc (center c, radius r) meets the open segment a->b.
bool disc_blocks_segment(double ax, double ay, double bx, double by, double cx, double cy,
                         double r) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  if (len2 <= 0.0) return false;
  double t = ((cx - ax) * dx + (cy - ay) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const double px = ax + t * dx - cx;
  const double py = ay + t * dy - cy;
  return px * px + py * py < r * r;
}

// Distance along the unit ray (ox,oy)+s(ux,uy), s >= 0, to the first point of
// the disc, or +inf when the ray misses. Zero when the origin is inside.
double ray_disc_distance(double ox, double oy, double ux, double uy, double cx, double cy,
                         double r) {
  const double wx = cx - ox;
  const double wy = cy - oy;
  const double along = wx * ux + wy * uy;
  const double perp2 = wx * wx + wy * wy - along * along;
  const double r2 = r * r;
  if (perp2 > r2 + kTangentSlack) return std::numeric_limits<double>::infinity();
  const double half_chord = std::sqrt(std::max(0.0, r2 - perp2));
  if (along + half_chord < 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, along - half_chord);
}

double ray_wall_distance(double ox, double oy, double ux, double uy, double side) {
  double best = std::numeric_limits<double>::infinity();
  if (ux > 0.0) best = std::min(best, (side - ox) / ux);
  if (ux < 0.0) best = std::min(best, -ox / ux);
  if (uy > 0.0) best = std::min(best, (side - oy) / uy);
  if (uy < 0.0) best = std::min(best, -oy / uy);
  return std::max(0.0, best);
}

}  // namespace

void CameraModel::validate() const {
  if (!(fov > 0.0 && fov < kPi)) throw Error(ErrorCode::kConfig, "camera: fov must be in (0, pi)");
  if (!(target_radius > 0.0)) throw Error(ErrorCode::kConfig, "camera: target_radius must be > 0");
}

double image_bearing(const Pose& observer, const Pose& target) {
  const double world = std::atan2(target.y - observer.y, target.x - observer.x);
  return normalize_angle(observer.theta - world);
}

CameraReading camera_observe(const WorldState& state, int predator_index, const CameraModel& camera,
                             double body_radius) {
  const Pose& self = state.predators[predator_index].pose;
  const Pose& prey = state.prey.pose;
  const double beta = image_bearing(self, prey);
  const double half_fov = camera.fov / 2.0;
  if (std::abs(beta) > half_fov) return {};
  for (int i = 0; i < kPredatorCount; ++i) {
    if (i == predator_index) continue;
    const Pose& other = state.predators[i].pose;
    if (disc_blocks_segment(self.x, self.y, prey.x, prey.y, other.x, other.y, body_radius)) {
      return {};
    }
  }
  const double d = distance(self, prey);
  const double width = 2.0 * std::atan(camera.target_radius / std::max(d, camera.target_radius));
  return {beta / half_fov, std::min(1.0, width / camera.fov)};
}

double ir_observe(const WorldState& state, int predator_index, const ArenaConfig& config) {
  const Pose& self = state.predators[predator_index].pose;
  const double ux = std::cos(self.theta);
  const double uy = std::sin(self.theta);
  const double ox = self.x + config.robot_body_radius * ux;
  const double oy = self.y + config.robot_body_radius * uy;

  double nearest = ray_wall_distance(ox, oy, ux, uy, config.side_length);
  auto consider = [&](const Pose& p) {
    nearest = std::min(nearest, ray_disc_distance(ox, oy, ux, uy, p.x, p.y, config.robot_body_radius));
  };
  for (int i = 0; i < kPredatorCount; ++i) {
    if (i != predator_index) consider(state.predators[i].pose);
  }
  consider(state.prey.pose);
  return nearest <= config.ir_range + kTangentSlack ? 1.0 : -1.0;
}

PredatorObservation predator_observe(const WorldState& state, int predator_index,
                                     const ArenaConfig& config, const CameraModel& camera) {
  const CameraReading cam = camera_observe(state, predator_index, camera, config.robot_body_radius);
  return {cam.x_image, cam.area, ir_observe(state, predator_index, config)};
}

PreyObservation omniscient_observe(const WorldState& state, const ArenaConfig& config) {
  PreyObservation obs;
  const Pose& prey = state.prey.pose;
  for (int i = 0; i < kPredatorCount; ++i) {
    const Pose& p = state.predators[i].pose;
    const double bearing = std::atan2(p.y - prey.y, p.x - prey.x);
    obs.dtheta[i] = normalize_angle(bearing - prey.theta) / kPi;
    obs.dist[i] = distance(p, prey) / config.side_length;
  }
  obs.x = 2.0 * prey.x / config.side_length - 1.0;
  obs.y = 2.0 * prey.y / config.side_length - 1.0;
  return obs;
}

}  // namespace predprey
