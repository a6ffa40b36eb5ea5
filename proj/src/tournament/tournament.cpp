#include "tournament/tournament.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "runs/layout.hpp"

namespace predprey {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTagTournament = 0x746f75726e;

struct LoadedRun {
  RunConfig config;
  std::vector<PredatorTrio> trios;
  std::vector<neat::Genome> prey;
};

PredatorTrio load_trio(const RunLayout& layout, int generation) {
  PredatorTrio trio;
  for (int i = 0; i < kPredatorCount; ++i) trio[i] = load_hof_genome(layout, predator_role(i), generation);
  return trio;
}

int run_generations(const RunLayout& layout) {
  if (!fs::exists(layout.manifest())) {
    throw Error(ErrorCode::kInventory, layout.root.string() + " is not a run directory (no manifest.json)");
  }
  return read_manifest(layout).generations_completed;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::uint64_t tournament_episode_seed(std::uint64_t seed, int predator_gen, int prey_gen, int episode) {
  return derive_seed({seed, kTagTournament, static_cast<std::uint64_t>(predator_gen),
                      static_cast<std::uint64_t>(prey_gen), static_cast<std::uint64_t>(episode)});
}

TournamentMatrix play_tournament(const std::vector<PredatorTrio>& trios,
                                 const std::vector<neat::Genome>& prey, const ArenaConfig& arena,
                                 const CameraModel& camera, int episodes, std::uint64_t seed,
                                 unsigned threads) {
  if (episodes < 1) throw Error(ErrorCode::kArgument, "episodes per cell must be >= 1");
  TournamentMatrix m;
  m.predator_generations = static_cast<int>(trios.size());
  m.prey_generations = static_cast<int>(prey.size());
  m.episodes = episodes;
  m.seed = seed;
  m.episode_time = arena.episode_time;
  m.cells.assign(trios.size() * prey.size(), 0.0);
  std::atomic<long long> count{0};
  parallel_for(m.cells.size(), threads, [&](std::size_t cell) {
    const int i = static_cast<int>(cell / prey.size());
    const int j = static_cast<int>(cell % prey.size());
    const std::array<const neat::Genome*, kPredatorCount> team{&trios[i][0], &trios[i][1], &trios[i][2]};
    double sum = 0.0;
    for (int e = 0; e < episodes; ++e) {
      sum += run_episode(team, prey[j], arena, camera, tournament_episode_seed(seed, i, j, e)).t;
      ++count;
    }
    m.cells[cell] = sum / episodes;
  });
  m.episodes_run = count.load();
  return m;
}

TournamentMatrix master_tournament(const std::string& run_dir, int episodes, std::uint64_t seed,
                                   unsigned threads) {
  const RunLayout layout{run_dir};
  const RunConfig config = load_run_dir_config(layout);
  const int generations = run_generations(layout);
  if (generations < 1) throw Error(ErrorCode::kInventory, run_dir + " has no completed generations");
  std::vector<PredatorTrio> trios;
  std::vector<neat::Genome> prey;
  for (int g = 0; g < generations; ++g) {
    trios.push_back(load_trio(layout, g));
    prey.push_back(load_hof_genome(layout, Role::kPrey, g));
  }
  return play_tournament(trios, prey, config.env.arena, config.env.camera, episodes, seed, threads);
}

ScoreSeries accumulated_scores(const TournamentMatrix& m, double episode_time) {
  ScoreSeries s;
  s.prey.assign(m.prey_generations, 0.0);
  s.predator.assign(m.predator_generations, 0.0);
  for (int i = 0; i < m.predator_generations; ++i) {
    for (int j = 0; j < m.prey_generations; ++j) {
      s.prey[j] += m.at(i, j);
      s.predator[i] += episode_time - m.at(i, j);
    }
  }
  return s;
}

std::string matrix_to_csv(const TournamentMatrix& m) {
  std::string out = "pred_gen\\prey_gen";
  for (int j = 0; j < m.prey_generations; ++j) out += "," + std::to_string(j);
  out += "\n";
  for (int i = 0; i < m.predator_generations; ++i) {
    out += std::to_string(i);
    for (int j = 0; j < m.prey_generations; ++j) out += "," + fixed3(m.at(i, j));
    out += "\n";
  }
  return out;
}

std::string scores_to_csv(const ScoreSeries& s) {
  std::string out = "generation,prey_score,predator_score\n";
  const std::size_t n = std::max(s.prey.size(), s.predator.size());
  for (std::size_t g = 0; g < n; ++g) {
    out += std::to_string(g) + ",";
    out += (g < s.prey.size() ? fixed6(s.prey[g]) : "") + ",";
    out += (g < s.predator.size() ? fixed6(s.predator[g]) : "") + "\n";
  }
  return out;
}

std::string tournament_summary(const TournamentMatrix& m, const ScoreSeries& s) {
  auto argmax = [](const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  double total = 0.0;
  for (double c : m.cells) total += c;
  std::ostringstream out;
  out << "master tournament: " << m.predator_generations << " predator x " << m.prey_generations
      << " prey generations, " << m.episodes << " episode(s) per cell, seed " << m.seed << "\n";
  out << "mean caught time: " << fixed3(m.cells.empty() ? 0.0 : total / m.cells.size()) << " s\n";
  if (!s.predator.empty()) {
    const int g = argmax(s.predator);
    out << "best predator generation: " << g << " (score " << fixed3(s.predator[g]) << ")\n";
  }
  if (!s.prey.empty()) {
    const int g = argmax(s.prey);
    out << "best prey generation: " << g << " (score " << fixed3(s.prey[g]) << ")\n";
  }
  return out.str();
}

void write_tournament(const std::string& out_dir, const TournamentMatrix& m, const ScoreSeries& s) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir + ": " + ec.message());
  write_file_atomic(fs::path(out_dir) / "matrix.csv", matrix_to_csv(m));
  write_file_atomic(fs::path(out_dir) / "scores.csv", scores_to_csv(s));
  write_file_atomic(fs::path(out_dir) / "summary.txt", tournament_summary(m, s));
}

std::vector<ExportedEpisode> export_trajectories(int predator_gen, int prey_gen,
                                                 const std::string& run_dir, int episodes,
                                                 std::uint64_t seed, const std::string& out_dir) {
  if (episodes < 1) throw Error(ErrorCode::kArgument, "episodes must be >= 1");
  const RunLayout layout{run_dir};
  const RunConfig config = load_run_dir_config(layout);
  const PredatorTrio trio = load_trio(layout, predator_gen);
  const neat::Genome prey = load_hof_genome(layout, Role::kPrey, prey_gen);
  const std::array<const neat::Genome*, kPredatorCount> team{&trio[0], &trio[1], &trio[2]};

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir + ": " + ec.message());

  std::vector<ExportedEpisode> rows;
  std::string index = "episode,file,seed,caught,t,catcher,d0,d1,d2\n";
  for (int e = 0; e < episodes; ++e) {
    ExportedEpisode row;
    row.episode = e;
    row.seed = tournament_episode_seed(seed, predator_gen, prey_gen, e);
    const EpisodeOutcome out = run_episode(team, prey, config.env.arena, config.env.camera, row.seed);
    char name[32];
    std::snprintf(name, sizeof name, "episode_%03d.csv", e);
    row.file = name;
    row.caught = out.caught;
    row.t = out.t;
    row.catcher = out.catcher;
    row.final_distances = out.final_distances;
    std::ostringstream traj;
    write_trajectory(traj, out.trajectory);
    write_file_atomic(fs::path(out_dir) / name, traj.str());
    index += std::to_string(e) + "," + row.file + "," + std::to_string(row.seed) + "," +
             (row.caught ? "1" : "0") + "," + fixed6(row.t) + "," + std::to_string(row.catcher);
    for (double d : row.final_distances) index += "," + fixed6(d);
    index += "\n";
    rows.push_back(row);
  }
  write_file_atomic(fs::path(out_dir) / "index.csv", index);
  return rows;
}

}  // namespace predprey
