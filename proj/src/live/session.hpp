#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "coevo/coevo.hpp"
#include "json.hpp"

namespace predprey::live {

enum KeyBits : std::uint32_t {
  kKeyForward = 1u << 0,
  kKeyBack = 1u << 1,
  kKeyLeft = 1u << 2,
  kKeyRight = 1u << 3,
};
inline constexpr std::uint32_t kKnownKeys = kKeyForward | kKeyBack | kKeyLeft | kKeyRight;

// Wheel speeds as fractions of omega_max, (left, right). Opposite keys cancel.
//   forward (1, 1)          back (-0.6, -0.6)
//   left (-0.5, 0.5)        right (0.5, -0.5)
//   forward+left (0.25, 1)  forward+right (1, 0.25)
//   back+left (-0.15, -0.6) back+right (-0.6, -0.15)
// Throws Error(kArgument) for bits outside kKnownKeys.
std::array<double, 2> key_fractions(std::uint32_t keys);
WheelCommand key_command(std::uint32_t keys, double omega_max);

inline constexpr double kCountdownSeconds = 3.0;

struct FrameMessage {
  int trial = 0;
  int tick = 0;
  double t = 0.0;
  Pose prey;
  std::array<Pose, kPredatorCount> predators{};
  std::array<PredatorObservation, kPredatorCount> observations{};
  bool caught = false;
};

struct TrialRecord {
  int trial = 0;
  Role role = Role::kPrey;  // the human-controlled robot
  double time = 0.0;        // catch time, or T
  bool caught = false;
  int generation = 0;
  std::uint64_t seed = 0;
};

struct TickResult {
  FrameMessage frame;
  std::optional<TrialRecord> ended;
};

struct TrialStats {
  Role role = Role::kPrey;
  int generation = 0;
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

// Grouped by (role, generation), sorted by role then generation. Throws
// Error(kTrial) when there are no records.
std::vector<TrialStats> trial_stats(const std::vector<TrialRecord>& records);

// The genomes one served generation fields in every role.
struct GenerationLineup {
  int generation = 0;
  std::array<neat::Genome, kPredatorCount> predators;
  neat::Genome prey;
};

// One interactive trial at a time. Everything except set_keys must be called
// from the loop thread; set_keys only writes the latest-key mailbox.
class Session {
 public:
  Session(GenerationLineup lineup, ArenaConfig arena = {}, CameraModel camera = {});

  // Throws Error(kTrial) while a trial is in progress.
  FrameMessage start_trial(Role human, std::uint64_t seed);

  // Records the latest key state for the trial; the first call also starts
  // the clock. Returns false (ignored) if `trial` is not the active trial.
  // Throws Error(kArgument) for unknown key bits.
  bool set_keys(int trial, std::uint32_t keys);

  // Loop step. During the countdown it only counts down and returns nothing;
  // afterwards it advances the arena by one tick using the latest key state.
  std::optional<TickResult> tick();

  // Drops the active trial without recording it (client went away).
  void abort_trial() { active_ = false; }

  bool active() const { return active_; }
  bool clock_running() const { return active_ && started_.load(); }
  int active_trial() const { return active_ ? trial_ : 0; }
  Role human_role() const { return human_; }
  int generation() const { return lineup_.generation; }
  const ArenaConfig& arena() const { return arena_; }
  const std::vector<TrialRecord>& records() const { return records_; }

  // Appends each finished trial as one JSON line, flushed immediately.
  void open_log(const std::string& path);
  void flush_log();

 private:
  FrameMessage frame() const;

  GenerationLineup lineup_;
  ArenaConfig arena_;
  CameraModel camera_;
  std::array<Policy, kPredatorCount> predator_policies_;
  Policy prey_policy_;
  WorldState state_;
  bool active_ = false;
  int trial_ = 0;
  Role human_ = Role::kPrey;
  std::uint64_t seed_ = 0;
  int countdown_ticks_ = 0;
  std::atomic<bool> started_{false};
  std::atomic<std::uint32_t> keys_{0};
  std::vector<TrialRecord> records_;
  std::ofstream log_;
};

// Runs one trial to completion feeding keys[k] before tick k + 1 (the last
// entry repeats). Used by tests and the reproducibility harness.
TrialRecord run_scripted_trial(Session& session, Role human, std::uint64_t seed,
                               const std::vector<std::uint32_t>& keys);

nlohmann::json frame_to_json(const FrameMessage& frame);
nlohmann::json record_to_json(const TrialRecord& record);
nlohmann::json stats_to_json(const std::vector<TrialStats>& stats);

}  // namespace predprey::live
