#include "runs/replay.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "common/error.hpp"

namespace predprey {

namespace fs = std::filesystem;

namespace {

// Export rounding is 5e-7 per coordinate; distances can drift by ~1.5e-6.
constexpr double kTolerance = 5e-6;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, bool& ok) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  ok = !s.empty() && end == s.c_str() + s.size() && std::isfinite(v);
  return v;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

std::vector<TrajectoryFrame> parse_trajectory(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kMalformed, source + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail("empty file");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trajectory_header()) fail("expected header '" + trajectory_header() + "'");

  std::vector<TrajectoryFrame> frames;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == EOF) break;
      fail("blank line");
    }
    const auto cells = split_csv(line);
    if (cells.size() != 1 + 3 * (1 + kPredatorCount)) {
      fail("expected " + std::to_string(1 + 3 * (1 + kPredatorCount)) + " fields, got " +
           std::to_string(cells.size()));
    }
    TrajectoryFrame f;
    bool ok = false;
    const double tick = parse_real(cells[0], ok);
    if (!ok || tick != std::floor(tick) || tick < 0) fail("bad tick '" + cells[0] + "'");
    f.tick = static_cast<int>(tick);
    const int expected = frames.empty() ? 0 : frames.back().tick + 1;
    if (f.tick != expected) fail("tick " + std::to_string(f.tick) + " where " + std::to_string(expected) + " was expected");
    std::array<double, 3 * (1 + kPredatorCount)> v{};
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = parse_real(cells[k + 1], ok);
      if (!ok) fail("bad number '" + cells[k + 1] + "'");
    }
    f.prey = {v[0], v[1], v[2]};
    for (int i = 0; i < kPredatorCount; ++i) f.predators[i] = {v[3 + 3 * i], v[4 + 3 * i], v[5 + 3 * i]};
    frames.push_back(f);
  }
  if (frames.empty()) fail("no frames after the header");
  return frames;
}

std::vector<TrajectoryFrame> read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trajectory(buf.str(), path);
}

ReplayReport replay_trajectory(const std::string& path, const ArenaConfig& config) {
  config.validate();
  const auto frames = read_trajectory(path);
  const double r = config.robot_body_radius;
  const double lo = r - kTolerance;
  const double hi = config.side_length - r + kTolerance;
  const int last = frames.back().tick;
  auto violation = [](int tick, const std::string& what) {
    throw Error(ErrorCode::kInvariant, "tick " + std::to_string(tick) + ": " + what);
  };
  if (last > config.total_ticks()) {
    violation(last, "trajectory runs past the episode length of " + std::to_string(config.total_ticks()) + " ticks");
  }

  ReplayReport report;
  for (const auto& f : frames) {
    std::array<const Pose*, 1 + kPredatorCount> bodies{&f.prey, &f.predators[0], &f.predators[1], &f.predators[2]};
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      const Pose& p = *bodies[b];
      if (p.x < lo || p.x > hi || p.y < lo || p.y > hi) {
        const std::string who = b == 0 ? "prey" : "predator " + std::to_string(b - 1);
        violation(f.tick, "containment violation: " + who + " at " + fmt("(%.6f, %.6f)", p.x, p.y));
      }
    }
    for (std::size_t a = 0; a < bodies.size(); ++a) {
      for (std::size_t b = a + 1; b < bodies.size(); ++b) {
        if (distance(*bodies[a], *bodies[b]) < 2.0 * r - kTolerance) violation(f.tick, "robot bodies overlap");
      }
    }
    double nearest = std::numeric_limits<double>::infinity();
    int catcher = -1;
    for (int i = 0; i < kPredatorCount; ++i) {
      const double d = distance(f.predators[i], f.prey);
      if (d < nearest) {
        nearest = d;
        catcher = i;
      }
    }
    if (f.tick < last && nearest < config.catch_radius - kTolerance) {
      violation(f.tick, "prey is caught but the trajectory continues");
    }
    if (f.tick == last) {
      report.caught = nearest <= config.catch_radius + kTolerance;
      report.catcher = report.caught ? catcher : -1;
    }
  }
  if (!report.caught && last != config.total_ticks()) {
    violation(last, "trajectory ends before the time limit without a catch");
  }
  if (report.caught && last == 0) violation(0, "caught in the initial placement");
  report.ticks = last;
  report.t = last == config.total_ticks() ? config.episode_time : last * config.dt;

  // Cross-check against a tournament export index when present.
  const fs::path index = fs::path(path).parent_path() / "index.csv";
  const std::string name = fs::path(path).filename().string();
  if (fs::exists(index)) {
    std::ifstream in(index);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto cells = split_csv(line);
      if (cells.size() < 5 || cells[1] != name) continue;
      const bool listed_caught = cells[3] == "1" || cells[3] == "true";
      bool ok = false;
      const double listed_t = parse_real(cells[4], ok);
      if (!ok || listed_caught != report.caught || std::abs(listed_t - report.t) > 1e-6) {
        violation(last, "outcome disagrees with " + index.string());
      }
    }
  }

  if (report.caught) {
    report.summary = fmt("valid, caught at t=%.3f", report.t) + " by predator " +
                     std::to_string(report.catcher) + " (" + std::to_string(last) + " ticks)";
  } else {
    report.summary = fmt("valid, not caught (t=%.3f)", report.t);
  }
  return report;
}

}  // namespace predprey
