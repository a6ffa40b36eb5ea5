#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "arena/episode.hpp"
#include "neat/neat.hpp"

namespace predprey {

enum class Role { kPrey = 0, kPredator0 = 1, kPredator1 = 2, kPredator2 = 3 };

inline constexpr std::array<Role, 4> kRoleCycle{Role::kPrey, Role::kPredator0, Role::kPredator1,
                                                Role::kPredator2};

const char* role_name(Role role);
Role role_from_name(const std::string& name);  // throws Error(kArgument)
inline int role_index(Role role) { return static_cast<int>(role); }
inline int predator_index(Role role) { return role_index(role) - 1; }
inline Role predator_role(int index) { return static_cast<Role>(index + 1); }
int role_input_arity(Role role);

struct CoevoConfig {
  int evaluations = 5;  // K
  int hof_window = 10;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;

  void validate() const;
};

// Per-role archive of the best genome of every completed generation.
class HallOfFame {
 public:
  void append(Role role, neat::Genome genome);
  const neat::Genome& at(Role role, int generation) const;
  int size(Role role) const { return static_cast<int>(best_[role_index(role)].size()); }
  // Generations completed by every role.
  int complete_generations() const;
  const std::vector<neat::Genome>& entries(Role role) const { return best_[role_index(role)]; }

  bool operator==(const HallOfFame&) const = default;

 private:
  std::array<std::vector<neat::Genome>, 4> best_;
};

double prey_fitness(std::span<const double> catch_times, double episode_time);
double prey_fitness(std::span<const EpisodeOutcome> outcomes, double episode_time);
double predator_fitness(std::span<const double> final_distances, double catch_radius);
double predator_fitness(std::span<const EpisodeOutcome> outcomes, int predator, double catch_radius);

// Draws a generation uniformly from the last min(window, current) completed
// generations; -1 when nothing has completed yet.
int sample_generation(int current_generation, int window, Rng& rng);

struct Opponents {
  int generation = -1;  // -1: drawn from the initial pool
  std::vector<const neat::Genome*> genomes;  // 3 predators for the prey, else 1 prey
};

struct RoleGenomes {
  std::array<std::vector<neat::Genome>, 4> by_role;
};

Opponents sample_opponents(const HallOfFame& hof, const RoleGenomes& initial_pool, Role role,
                           int current_generation, int window, Rng& rng);

struct FitnessAggregate {
  std::vector<EpisodeOutcome> outcomes;  // trajectories dropped
  double fitness = 0.0;
};

struct Environment {
  ArenaConfig arena;
  CameraModel camera;
  neat::NeatConfig neat;
  CoevoConfig coevo;

  void validate() const;
};

struct CoevoState {
  std::array<neat::Population, 4> populations;
  RoleGenomes initial_pool;
  HallOfFame hof;
  int generation = 0;
  int role_cursor = 0;  // position in kRoleCycle; 0 at round boundaries
  std::uint64_t master_seed = 0;
  int evaluations = 0;
};

CoevoState make_coevo_state(const Environment& env);

// Fixed non-evolving predators for an evolving predator's turn: the previous
// generation's best, or a seeded pick from the initial pool at generation 0.
std::array<const neat::Genome*, kPredatorCount> teammates_for(const CoevoState& state, Role role,
                                                             int generation);

std::uint64_t episode_seed(std::uint64_t master_seed, int generation, Role role, int individual,
                           int episode);

FitnessAggregate evaluate_individual(const neat::Genome& individual, Role role, int individual_index,
                                     const CoevoState& state, const Environment& env);

struct GenerationRecord {
  int generation = 0;
  Role role = Role::kPrey;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  int episodes = 0;
  double wall_seconds = 0.0;
};

using RecordSink = std::function<void(const GenerationRecord&)>;

// Evolves each role once in cycle order and advances the generation index.
std::vector<GenerationRecord> evolve_round(CoevoState& state, const Environment& env,
                                           const RecordSink& sink = {});

nlohmann::json coevo_state_to_json(const CoevoState& state);
CoevoState coevo_state_from_json(const nlohmann::json& doc);
nlohmann::json record_to_json(const GenerationRecord& record);

}  // namespace predprey
