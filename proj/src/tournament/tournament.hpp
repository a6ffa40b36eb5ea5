#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coevo/coevo.hpp"

namespace predprey {

struct TournamentMatrix {
  int predator_generations = 0;  // rows
  int prey_generations = 0;      // columns
  int episodes = 0;              // E, per cell
  std::uint64_t seed = 0;
  double episode_time = 0.0;
  std::vector<double> cells;  // row-major mean caught times
  long long episodes_run = 0;

  double at(int predator_gen, int prey_gen) const {
    return cells[static_cast<std::size_t>(predator_gen) * prey_generations + prey_gen];
  }
};

struct ScoreSeries {
  std::vector<double> prey;      // indexed by prey generation
  std::vector<double> predator;  // indexed by predator generation
};

using PredatorTrio = std::array<neat::Genome, kPredatorCount>;

// Seed of episode e in cell (i, j); export_trajectories uses the same seeds.
std::uint64_t tournament_episode_seed(std::uint64_t seed, int predator_gen, int prey_gen, int episode);

// Every trio against every prey, E episodes each, cells in parallel.
TournamentMatrix play_tournament(const std::vector<PredatorTrio>& trios,
                                 const std::vector<neat::Genome>& prey, const ArenaConfig& arena,
                                 const CameraModel& camera, int episodes, std::uint64_t seed,
                                 unsigned threads = 1);

// Loads every generation's best genomes from a run directory and plays them.
TournamentMatrix master_tournament(const std::string& run_dir, int episodes, std::uint64_t seed,
                                   unsigned threads = 1);

ScoreSeries accumulated_scores(const TournamentMatrix& matrix, double episode_time);

// Grid with a header row of prey generations and a first column of predator
// generations, values to 3 decimals.
std::string matrix_to_csv(const TournamentMatrix& matrix);
// generation,prey_score,predator_score
std::string scores_to_csv(const ScoreSeries& scores);
std::string tournament_summary(const TournamentMatrix& matrix, const ScoreSeries& scores);

// Writes matrix.csv, scores.csv and summary.txt into out_dir.
void write_tournament(const std::string& out_dir, const TournamentMatrix& matrix,
                      const ScoreSeries& scores);

struct ExportedEpisode {
  int episode = 0;
  std::string file;
  std::uint64_t seed = 0;
  bool caught = false;
  double t = 0.0;
  int catcher = -1;
  std::array<double, kPredatorCount> final_distances{};
};

// One episode_NNN.csv per episode plus index.csv in out_dir.
std::vector<ExportedEpisode> export_trajectories(int predator_gen, int prey_gen,
                                                 const std::string& run_dir, int episodes,
                                                 std::uint64_t seed, const std::string& out_dir);

}  // namespace predprey
