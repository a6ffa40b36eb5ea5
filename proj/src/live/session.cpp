#include "live/session.hpp"

#include <cmath>
#include <map>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace predprey::live {

using nlohmann::json;

std::array<double, 2> key_fractions(std::uint32_t keys) {
  if (keys & ~kKnownKeys) {
    throw Error(ErrorCode::kArgument, "unknown key bits in " + std::to_string(keys));
  }
  const bool fwd = (keys & kKeyForward) && !(keys & kKeyBack);
  const bool back = (keys & kKeyBack) && !(keys & kKeyForward);
  const bool left = (keys & kKeyLeft) && !(keys & kKeyRight);
  const bool right = (keys & kKeyRight) && !(keys & kKeyLeft);
  if (fwd) {
    if (left) return {0.25, 1.0};
    if (right) return {1.0, 0.25};
    return {1.0, 1.0};
  }
  if (back) {
    if (left) return {-0.15, -0.6};
    if (right) return {-0.6, -0.15};
    return {-0.6, -0.6};
  }
  if (left) return {-0.5, 0.5};
  if (right) return {0.5, -0.5};
  return {0.0, 0.0};
}

WheelCommand key_command(std::uint32_t keys, double omega_max) {
  const auto f = key_fractions(keys);
  return {f[0] * omega_max, f[1] * omega_max};
}

std::vector<TrialStats> trial_stats(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::kTrial, "no finished trials");
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const auto& r : records) groups[{role_index(r.role), r.generation}].push_back(r.time);
  std::vector<TrialStats> out;
  for (const auto& [key, times] : groups) {
    TrialStats s;
    s.role = static_cast<Role>(key.first);
    s.generation = key.second;
    s.count = static_cast<int>(times.size());
    double sum = 0.0;
    for (double t : times) sum += t;
    s.mean = sum / s.count;
    double sq = 0.0;
    for (double t : times) sq += (t - s.mean) * (t - s.mean);
    s.stddev = std::sqrt(sq / s.count);
    out.push_back(s);
  }
  return out;
}

Session::Session(GenerationLineup lineup, ArenaConfig arena, CameraModel camera)
    : lineup_(std::move(lineup)), arena_(arena), camera_(camera) {
  arena_.validate();
  camera_.validate();
  for (int i = 0; i < kPredatorCount; ++i) {
    check_controller_arity(lineup_.predators[i], kPredatorInputs, "predator " + std::to_string(i));
    predator_policies_[i] = network_policy(lineup_.predators[i]);
  }
  check_controller_arity(lineup_.prey, kPreyInputs, "prey");
  prey_policy_ = network_policy(lineup_.prey);
}

FrameMessage Session::start_trial(Role human, std::uint64_t seed) {
  if (active_) {
    throw Error(ErrorCode::kTrial, "trial " + std::to_string(trial_) + " is still in progress");
  }
  ++trial_;
  active_ = true;
  human_ = human;
  seed_ = seed;
  state_ = initial_placement(arena_, seed);
  countdown_ticks_ = static_cast<int>(std::lround(kCountdownSeconds / arena_.dt));
  started_.store(false);
  keys_.store(0);
  return frame();
}

bool Session::set_keys(int trial, std::uint32_t keys) {
  key_fractions(keys);
  if (!active_ || trial != trial_) return false;
  keys_.store(keys);
  started_.store(true);
  return true;
}

std::optional<TickResult> Session::tick() {
  if (!active_) return std::nullopt;
  if (!started_.load()) {
    if (--countdown_ticks_ > 0) return std::nullopt;
    started_.store(true);
  }
  const WheelCommand human_cmd = key_command(keys_.load(), arena_.omega_max);
  std::array<WheelCommand, kPredatorCount> commands{};
  for (int i = 0; i < kPredatorCount; ++i) {
    if (human_ == predator_role(i)) {
      commands[i] = human_cmd;
    } else {
      const auto inputs = predator_observe(state_, i, arena_, camera_).as_inputs();
      commands[i] = to_wheel_command(predator_policies_[i](inputs), arena_);
    }
  }
  WheelCommand prey_cmd = human_cmd;
  if (human_ != Role::kPrey) {
    const auto inputs = omniscient_observe(state_, arena_).as_inputs();
    prey_cmd = to_wheel_command(prey_policy_(inputs), arena_);
  }
  advance_world(state_, commands, prey_cmd, arena_);

  TickResult result;
  result.frame = frame();
  if (state_.caught || state_.tick >= arena_.total_ticks()) {
    TrialRecord rec;
    rec.trial = trial_;
    rec.role = human_;
    rec.caught = state_.caught;
    rec.time = state_.caught ? *state_.catch_time : arena_.episode_time;
    rec.generation = lineup_.generation;
    rec.seed = seed_;
    records_.push_back(rec);
    if (log_.is_open()) log_ << record_to_json(rec).dump() << '\n' << std::flush;
    result.ended = rec;
    active_ = false;
  }
  return result;
}

FrameMessage Session::frame() const {
  FrameMessage f;
  f.trial = trial_;
  f.tick = state_.tick;
  f.t = state_.tick * arena_.dt;
  f.prey = state_.prey.pose;
  for (int i = 0; i < kPredatorCount; ++i) {
    f.predators[i] = state_.predators[i].pose;
    f.observations[i] = predator_observe(state_, i, arena_, camera_);
  }
  f.caught = state_.caught;
  return f;
}

void Session::open_log(const std::string& path) {
  log_.open(path, std::ios::binary | std::ios::app);
  if (!log_) throw Error(ErrorCode::kIo, "cannot open session log " + path);
}

void Session::flush_log() {
  if (log_.is_open()) log_.flush();
}

TrialRecord run_scripted_trial(Session& session, Role human, std::uint64_t seed,
                               const std::vector<std::uint32_t>& keys) {
  const int trial = session.start_trial(human, seed).trial;
  for (std::size_t k = 0;; ++k) {
    if (!keys.empty()) session.set_keys(trial, keys[std::min(k, keys.size() - 1)]);
    const auto step = session.tick();
    if (step && step->ended) return *step->ended;
  }
}

namespace {

json pose_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

}  // namespace

json frame_to_json(const FrameMessage& f) {
  json predators = json::array();
  json observations = json::array();
  for (int i = 0; i < kPredatorCount; ++i) {
    predators.push_back(pose_json(f.predators[i]));
    const auto& o = f.observations[i];
    observations.push_back({{"x_image", o.x_image}, {"A", o.area}, {"c", o.ir}});
  }
  return {{"type", "frame"},
          {"trial", f.trial},
          {"tick", f.tick},
          {"t", f.t},
          {"prey", pose_json(f.prey)},
          {"predators", std::move(predators)},
          {"observations", std::move(observations)},
          {"caught", f.caught}};
}

json record_to_json(const TrialRecord& r) {
  return {{"trial", r.trial},  {"role", role_name(r.role)}, {"time", r.time},
          {"caught", r.caught}, {"generation", r.generation}, {"seed", r.seed}};
}

json stats_to_json(const std::vector<TrialStats>& stats) {
  json groups = json::array();
  for (const auto& s : stats) {
    groups.push_back({{"role", role_name(s.role)},
                      {"generation", s.generation},
                      {"count", s.count},
                      {"mean", s.mean},
                      {"stddev", s.stddev}});
  }
  return {{"type", "stats"}, {"groups", std::move(groups)}};
}

}  // namespace predprey::live
