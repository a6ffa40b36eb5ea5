#include "coevo/coevo.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "common/error.hpp"
#include "common/parallel.hpp"

namespace predprey {

using nlohmann::json;

namespace {

// Stream tags for derive_seed so unrelated draws never share a stream.
constexpr std::uint64_t kTagInit = 0x696e6974;
constexpr std::uint64_t kTagTeammate = 0x7465616d;
constexpr std::uint64_t kTagOpponent = 0x6f707030;
constexpr std::uint64_t kTagBreed = 0x62726564;
constexpr std::uint64_t kTagEpisode = 0x65706973;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kConfig, std::string("coevolution config: ") + what);
}

EpisodeOutcome without_trajectory(EpisodeOutcome o) {
  o.trajectory.clear();
  o.trajectory.shrink_to_fit();
  return o;
}

}  // namespace

const char* role_name(Role role) {
  switch (role) {
    case Role::kPrey: return "prey";
    case Role::kPredator0: return "pred0";
    case Role::kPredator1: return "pred1";
    case Role::kPredator2: return "pred2";
  }
  return "prey";
}

Role role_from_name(const std::string& name) {
  for (Role r : kRoleCycle) {
    if (name == role_name(r)) return r;
  }
  throw Error(ErrorCode::kArgument, "unknown role '" + name + "'");
}

int role_input_arity(Role role) { return role == Role::kPrey ? kPreyInputs : kPredatorInputs; }

void CoevoConfig::validate() const {
  require(evaluations >= 1, "evaluations must be >= 1");
  require(hof_window >= 1, "hof_window must be >= 1");
}

void Environment::validate() const {
  arena.validate();
  camera.validate();
  neat.validate();
  coevo.validate();
}

void HallOfFame::append(Role role, neat::Genome genome) {
  best_[role_index(role)].push_back(std::move(genome));
}

const neat::Genome& HallOfFame::at(Role role, int generation) const {
  const auto& list = best_[role_index(role)];
  if (generation < 0 || generation >= static_cast<int>(list.size())) {
    throw Error(ErrorCode::kInventory, std::string("hall of fame has no ") + role_name(role) +
                                           " entry for generation " + std::to_string(generation));
  }
  return list[generation];
}

int HallOfFame::complete_generations() const {
  int n = size(Role::kPrey);
  for (Role r : kRoleCycle) n = std::min(n, size(r));
  return n;
}

double prey_fitness(std::span<const double> catch_times, double episode_time) {
  if (catch_times.empty()) throw Error(ErrorCode::kArgument, "prey fitness needs at least one evaluation");
  double sum = 0.0;
  for (double t : catch_times) sum += t / episode_time;
  return sum / static_cast<double>(catch_times.size());
}

double prey_fitness(std::span<const EpisodeOutcome> outcomes, double episode_time) {
  std::vector<double> times;
  for (const auto& o : outcomes) times.push_back(o.t);
  return prey_fitness(times, episode_time);
}

double predator_fitness(std::span<const double> final_distances, double catch_radius) {
  if (final_distances.empty()) {
    throw Error(ErrorCode::kArgument, "predator fitness needs at least one evaluation");
  }
  double sum = 0.0;
  for (double d : final_distances) sum += 1.0 / std::max(d, catch_radius);
  return sum / static_cast<double>(final_distances.size());
}

double predator_fitness(std::span<const EpisodeOutcome> outcomes, int predator, double catch_radius) {
  std::vector<double> d;
  for (const auto& o : outcomes) d.push_back(o.final_distances[predator]);
  return predator_fitness(d, catch_radius);
}

int sample_generation(int current_generation, int window, Rng& rng) {
  const int span = std::min(window, current_generation);
  if (span <= 0) return -1;
  return current_generation - span + static_cast<int>(rng.index(static_cast<std::size_t>(span)));
}

Opponents sample_opponents(const HallOfFame& hof, const RoleGenomes& initial_pool, Role role,
                           int current_generation, int window, Rng& rng) {
  Opponents out;
  out.generation = sample_generation(current_generation, window, rng);
  auto pick = [&](Role r) -> const neat::Genome* {
    if (out.generation >= 0) return &hof.at(r, out.generation);
    const auto& pool = initial_pool.by_role[role_index(r)];
    return &pool[rng.index(pool.size())];
  };
  if (role == Role::kPrey) {
    // One generation's predators play together as a team.
    for (int i = 0; i < kPredatorCount; ++i) out.genomes.push_back(pick(predator_role(i)));
  } else {
    out.genomes.push_back(pick(Role::kPrey));
  }
  return out;
}

CoevoState make_coevo_state(const Environment& env) {
  env.validate();
  CoevoState state;
  state.master_seed = env.coevo.master_seed;
  state.evaluations = env.coevo.evaluations;
  for (Role r : kRoleCycle) {
    Rng rng(derive_seed({env.coevo.master_seed, kTagInit, static_cast<std::uint64_t>(role_index(r))}));
    state.populations[role_index(r)] = neat::make_population(role_input_arity(r), kWheelOutputs, env.neat, rng);
    state.initial_pool.by_role[role_index(r)] = state.populations[role_index(r)].members;
  }
  return state;
}

std::array<const neat::Genome*, kPredatorCount> teammates_for(const CoevoState& state, Role role,
                                                             int generation) {
  std::array<const neat::Genome*, kPredatorCount> team{};
  for (int i = 0; i < kPredatorCount; ++i) {
    const Role mate = predator_role(i);
    if (mate == role) continue;
    if (generation > 0) {
      team[i] = &state.hof.at(mate, generation - 1);
    } else {
      const auto& pool = state.initial_pool.by_role[role_index(mate)];
      Rng rng(derive_seed({state.master_seed, kTagTeammate, static_cast<std::uint64_t>(role_index(role)),
                           static_cast<std::uint64_t>(i)}));
      team[i] = &pool[rng.index(pool.size())];
    }
  }
  return team;
}

std::uint64_t episode_seed(std::uint64_t master_seed, int generation, Role role, int individual,
                           int episode) {
  return derive_seed({master_seed, kTagEpisode, static_cast<std::uint64_t>(generation),
                      static_cast<std::uint64_t>(role_index(role)), static_cast<std::uint64_t>(individual),
                      static_cast<std::uint64_t>(episode)});
}

FitnessAggregate evaluate_individual(const neat::Genome& individual, Role role, int individual_index,
                                     const CoevoState& state, const Environment& env) {
  check_controller_arity(individual, role_input_arity(role), role_name(role));
  const int generation = state.generation;
  const auto team = role == Role::kPrey ? std::array<const neat::Genome*, kPredatorCount>{}
                                         : teammates_for(state, role, generation);
  FitnessAggregate agg;
  for (int k = 0; k < state.evaluations; ++k) {
    const std::uint64_t seed = episode_seed(state.master_seed, generation, role, individual_index, k);
    Rng opp_rng(derive_seed({seed, kTagOpponent}));
    const Opponents opp =
        sample_opponents(state.hof, state.initial_pool, role, generation, env.coevo.hof_window, opp_rng);
    EpisodeOutcome outcome;
    if (role == Role::kPrey) {
      outcome = run_episode({opp.genomes[0], opp.genomes[1], opp.genomes[2]}, individual, env.arena,
                            env.camera, seed);
    } else {
      auto lineup = team;
      lineup[predator_index(role)] = &individual;
      outcome = run_episode(lineup, *opp.genomes[0], env.arena, env.camera, seed);
    }
    agg.outcomes.push_back(without_trajectory(std::move(outcome)));
  }
  agg.fitness = role == Role::kPrey
                    ? prey_fitness(agg.outcomes, env.arena.episode_time)
                    : predator_fitness(agg.outcomes, predator_index(role), env.arena.catch_radius);
  return agg;
}

std::vector<GenerationRecord> evolve_round(CoevoState& state, const Environment& env,
                                           const RecordSink& sink) {
  std::vector<GenerationRecord> records;
  for (; state.role_cursor < static_cast<int>(kRoleCycle.size()); ++state.role_cursor) {
    const Role role = kRoleCycle[state.role_cursor];
    const auto started = std::chrono::steady_clock::now();
    neat::Population& pop = state.populations[role_index(role)];
    std::vector<double> fitness(pop.members.size());
    parallel_for(pop.members.size(), env.coevo.threads, [&](std::size_t i) {
      fitness[i] = evaluate_individual(pop.members[i], role, static_cast<int>(i), state, env).fitness;
    });
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(fitness.begin(), fitness.end()) - fitness.begin());
    state.hof.append(role, pop.members[best]);

    GenerationRecord rec;
    rec.generation = state.generation;
    rec.role = role;
    rec.best_fitness = fitness[best];
    rec.mean_fitness = std::accumulate(fitness.begin(), fitness.end(), 0.0) / fitness.size();
    rec.episodes = static_cast<int>(pop.members.size()) * state.evaluations;

    Rng breed(derive_seed({state.master_seed, kTagBreed, static_cast<std::uint64_t>(state.generation),
                           static_cast<std::uint64_t>(role_index(role))}));
    neat::next_generation(pop, fitness, env.neat, breed);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (sink) sink(rec);
    records.push_back(rec);
  }
  state.role_cursor = 0;
  ++state.generation;
  return records;
}

json coevo_state_to_json(const CoevoState& state) {
  json pops = json::object();
  json pool = json::object();
  json hof = json::object();
  for (Role r : kRoleCycle) {
    pops[role_name(r)] = neat::population_to_json(state.populations[role_index(r)]);
    json members = json::array();
    for (const auto& g : state.initial_pool.by_role[role_index(r)]) members.push_back(neat::genome_to_json(g));
    pool[role_name(r)] = std::move(members);
    json best = json::array();
    for (const auto& g : state.hof.entries(r)) best.push_back(neat::genome_to_json(g));
    hof[role_name(r)] = std::move(best);
  }
  return {{"generation", state.generation},
          {"role_cursor", state.role_cursor},
          {"master_seed", state.master_seed},
          {"evaluations", state.evaluations},
          {"populations", std::move(pops)},
          {"initial_pool", std::move(pool)},
          {"hall_of_fame", std::move(hof)}};
}

CoevoState coevo_state_from_json(const json& doc) {
  CoevoState state;
  try {
    state.generation = doc.at("generation").get<int>();
    state.role_cursor = doc.at("role_cursor").get<int>();
    state.master_seed = doc.at("master_seed").get<std::uint64_t>();
    state.evaluations = doc.at("evaluations").get<int>();
    for (Role r : kRoleCycle) {
      state.populations[role_index(r)] = neat::population_from_json(doc.at("populations").at(role_name(r)));
      for (const auto& g : doc.at("initial_pool").at(role_name(r))) {
        state.initial_pool.by_role[role_index(r)].push_back(neat::genome_from_json(g));
      }
      for (const auto& g : doc.at("hall_of_fame").at(role_name(r))) state.hof.append(r, neat::genome_from_json(g));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("checkpoint: ") + e.what());
  }
  return state;
}

json record_to_json(const GenerationRecord& r) {
  return {{"generation", r.generation},
          {"role", role_name(r.role)},
          {"best_fitness", r.best_fitness},
          {"mean_fitness", r.mean_fitness},
          {"episodes", r.episodes}};
}

}  // namespace predprey
