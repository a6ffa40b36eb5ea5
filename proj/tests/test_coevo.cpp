#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>

#include "coevo/coevo.hpp"
#include "common/error.hpp"

using namespace predprey;
using doctest::Approx;

namespace {

Environment small_env(int pop = 6, int k = 2) {
  Environment env;
  env.neat.population_size = pop;
  env.neat.elites = 2;
  env.coevo.evaluations = k;
  env.coevo.master_seed = 42;
  return env;
}

neat::Genome zero_genome(int inputs) {
  auto reg = neat::InnovationRegistry::for_arity(inputs, 2);
  return neat::make_minimal_genome(inputs, 2, std::vector<double>(inputs * 2, 0.0), reg);
}

EpisodeOutcome outcome_with(double t, std::array<double, 3> d) {
  EpisodeOutcome o;
  o.t = t;
  o.caught = t < 30.0;
  o.final_distances = d;
  return o;
}

}  // namespace

TEST_CASE("prey fitness") {
  const std::vector<double> never{30.0, 30.0, 30.0};
  CHECK(prey_fitness(never, 30.0) == 1.0);
  const std::vector<double> two{30.0, 15.0};
  CHECK(std::abs(prey_fitness(two, 30.0) - 0.75) <= 1e-12);
  const std::vector<double> one{3.0};
  CHECK(std::abs(prey_fitness(one, 30.0) - 0.1) <= 1e-12);
  const std::vector<double> none;
  CHECK_THROWS_AS(prey_fitness(none, 30.0), Error);

  const std::vector<EpisodeOutcome> outs{outcome_with(12.0, {1, 1, 1}), outcome_with(30.0, {1, 1, 1})};
  CHECK(prey_fitness(outs, 30.0) == Approx(0.7));
}

TEST_CASE("predator fitness") {
  const std::vector<double> far{2.0};
  CHECK(std::abs(predator_fitness(far, 0.3) - 0.5) <= 1e-12);
  const std::vector<double> caught{0.25};
  CHECK(std::abs(predator_fitness(caught, 0.3) - 1.0 / 0.3) <= 1e-12);
  const std::vector<double> two{1.0, 0.5};
  CHECK(std::abs(predator_fitness(two, 0.3) - 1.5) <= 1e-12);
  const std::vector<double> none;
  CHECK_THROWS_AS(predator_fitness(none, 0.3), Error);

  const std::vector<EpisodeOutcome> outs{outcome_with(30.0, {2.0, 1.0, 4.0})};
  CHECK(predator_fitness(outs, 1, 0.3) == 1.0);
  CHECK(predator_fitness(outs, 2, 0.3) == 0.25);
}

TEST_CASE("prey fitness is invariant to duplicating the outcome multiset") {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> t;
    const int n = 1 + static_cast<int>(rng.index(6));
    for (int i = 0; i < n; ++i) t.push_back(rng.uniform(0.1, 30.0));
    std::vector<double> doubled = t;
    doubled.insert(doubled.end(), t.begin(), t.end());
    CHECK(prey_fitness(doubled, 30.0) == Approx(prey_fitness(t, 30.0)).epsilon(1e-12));
  }
}

TEST_CASE("predator fitness is monotone in distance") {
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double a = rng.uniform(0.0, 5.7);
    const double b = rng.uniform(0.0, 5.7);
    const double lo = std::min(a, b), hi = std::max(a, b);
    const std::vector<double> near{lo}, far{hi};
    CHECK(predator_fitness(near, 0.3) >= predator_fitness(far, 0.3));
    if (lo > 0.3 && lo < hi) CHECK(predator_fitness(near, 0.3) > predator_fitness(far, 0.3));
  }
}

TEST_CASE("opponent window") {
  Rng rng(10);
  CHECK(sample_generation(0, 10, rng) == -1);
  std::set<int> seen;
  for (int k = 0; k < 2000; ++k) {
    const int g = sample_generation(5, 10, rng);
    CHECK(g >= 0);
    CHECK(g <= 4);
    seen.insert(g);
  }
  CHECK(seen.size() == 5);
  seen.clear();
  for (int k = 0; k < 2000; ++k) {
    const int g = sample_generation(50, 10, rng);
    CHECK(g >= 40);
    CHECK(g <= 49);
    seen.insert(g);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("opponent sampling is uniform over the window") {
  Rng rng(2025);
  std::map<int, int> counts;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) ++counts[sample_generation(37, 10, rng)];
  CHECK(counts.size() == 10);
  for (const auto& [g, n] : counts) {
    CHECK(g >= 27);
    CHECK(g <= 36);
    CHECK(std::abs(n / double(draws) - 0.1) <= 0.01);
  }
}

TEST_CASE("opponents come from the initial pool before any generation completes") {
  const Environment env = small_env();
  const CoevoState state = make_coevo_state(env);
  Rng rng(1);
  const Opponents prey_opp = sample_opponents(state.hof, state.initial_pool, Role::kPredator1, 0, 10, rng);
  REQUIRE(prey_opp.genomes.size() == 1);
  CHECK(prey_opp.generation == -1);
  const auto& pool = state.initial_pool.by_role[role_index(Role::kPrey)];
  CHECK(prey_opp.genomes[0] >= pool.data());
  CHECK(prey_opp.genomes[0] < pool.data() + pool.size());

  const Opponents team = sample_opponents(state.hof, state.initial_pool, Role::kPrey, 0, 10, rng);
  REQUIRE(team.genomes.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(team.genomes[i]->input_arity == 3);
}

TEST_CASE("prey opponents form one generation's team") {
  HallOfFame hof;
  RoleGenomes pool;
  for (int g = 0; g < 12; ++g) {
    for (Role r : kRoleCycle) {
      neat::Genome genome = zero_genome(role_input_arity(r));
      genome.nodes.back().bias = g;  // tag with the generation
      hof.append(r, genome);
    }
  }
  Rng rng(6);
  for (int k = 0; k < 200; ++k) {
    const Opponents opp = sample_opponents(hof, pool, Role::kPrey, 12, 10, rng);
    CHECK(opp.generation >= 2);
    for (const auto* g : opp.genomes) CHECK(g->nodes.back().bias == opp.generation);
  }
}

TEST_CASE("hall of fame bookkeeping") {
  HallOfFame hof;
  CHECK(hof.complete_generations() == 0);
  hof.append(Role::kPrey, zero_genome(8));
  CHECK(hof.complete_generations() == 0);
  for (Role r : {Role::kPredator0, Role::kPredator1, Role::kPredator2}) hof.append(r, zero_genome(3));
  CHECK(hof.complete_generations() == 1);
  CHECK_THROWS_AS(hof.at(Role::kPrey, 1), Error);
}

TEST_CASE("a prey that is never caught scores 1") {
  Environment env = small_env(4, 5);
  CoevoState state = make_coevo_state(env);
  // Hall of fame of idle predators.
  for (int g = 0; g < 3; ++g) {
    state.hof.append(Role::kPrey, zero_genome(8));
    for (int i = 0; i < 3; ++i) state.hof.append(predator_role(i), zero_genome(3));
  }
  state.generation = 3;
  const FitnessAggregate agg = evaluate_individual(zero_genome(8), Role::kPrey, 0, state, env);
  CHECK(agg.outcomes.size() == 5);
  CHECK(agg.fitness == 1.0);
  for (const auto& o : agg.outcomes) CHECK(o.trajectory.empty());
}

TEST_CASE("evaluation is deterministic and bounded") {
  const Environment env = small_env(6, 3);
  const CoevoState state = make_coevo_state(env);
  for (Role r : kRoleCycle) {
    const auto& members = state.populations[role_index(r)].members;
    for (int i = 0; i < static_cast<int>(members.size()); ++i) {
      const auto a = evaluate_individual(members[i], r, i, state, env);
      const auto b = evaluate_individual(members[i], r, i, state, env);
      CHECK(a.fitness == b.fitness);
      CHECK(a.outcomes.size() == 3);
      if (r == Role::kPrey) {
        CHECK(a.fitness > 0.0);
        CHECK(a.fitness <= 1.0);
      } else {
        CHECK(a.fitness > 0.0);
        CHECK(a.fitness <= 1.0 / 0.3 + 1e-12);
      }
    }
  }
}

TEST_CASE("teammates are the previous generation's best") {
  const Environment env = small_env();
  CoevoState state = make_coevo_state(env);
  const auto t0 = teammates_for(state, Role::kPredator1, 0);
  CHECK(t0[1] == nullptr);
  CHECK(t0[0] != nullptr);
  CHECK(t0[2] != nullptr);
  CHECK(t0 == teammates_for(state, Role::kPredator1, 0));
  evolve_round(state, env);
  const auto t1 = teammates_for(state, Role::kPredator0, 1);
  CHECK(t1[0] == nullptr);
  CHECK(t1[1] == &state.hof.at(Role::kPredator1, 0));
  CHECK(t1[2] == &state.hof.at(Role::kPredator2, 0));
}

TEST_CASE("evolve_round bookkeeping") {
  const Environment env = small_env(6, 2);
  CoevoState state = make_coevo_state(env);
  int sunk = 0;
  for (int g = 0; g < 3; ++g) {
    const auto records = evolve_round(state, env, [&](const GenerationRecord&) { ++sunk; });
    REQUIRE(records.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(records[k].role == kRoleCycle[k]);
      CHECK(records[k].generation == g);
      CHECK(records[k].episodes == 6 * 2);
      CHECK(records[k].best_fitness >= records[k].mean_fitness);
    }
    for (Role r : kRoleCycle) {
      CHECK(state.hof.size(r) == g + 1);
      CHECK(state.populations[role_index(r)].members.size() == 6);
    }
    CHECK(state.generation == g + 1);
    CHECK(state.role_cursor == 0);
  }
  CHECK(sunk == 12);
}

TEST_CASE("best-of-generation is the maximum fitness and enters the hall of fame") {
  const Environment env = small_env(5, 2);
  CoevoState state = make_coevo_state(env);
  CoevoState probe = state;
  const auto records = evolve_round(state, env);
  // Recompute the prey turn independently from the pre-round state.
  const auto& prey_pop = probe.populations[0].members;
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < prey_pop.size(); ++i) {
    const double f = evaluate_individual(prey_pop[i], Role::kPrey, static_cast<int>(i), probe, env).fitness;
    if (f > best) {
      best = f;
      arg = i;
    }
  }
  CHECK(records[0].best_fitness == best);
  CHECK(state.hof.at(Role::kPrey, 0) == prey_pop[arg]);
}

TEST_CASE("full-run determinism and checkpoint equivalence") {
  const Environment env = small_env(5, 2);
  CoevoState a = make_coevo_state(env);
  CoevoState b = make_coevo_state(env);
  for (int g = 0; g < 2; ++g) {
    evolve_round(a, env);
    evolve_round(b, env);
  }
  CHECK(a.hof == b.hof);

  const std::string snap = coevo_state_to_json(a).dump();
  CoevoState resumed = coevo_state_from_json(nlohmann::json::parse(snap));
  CHECK(coevo_state_to_json(resumed).dump() == snap);
  evolve_round(a, env);
  evolve_round(resumed, env);
  CHECK(a.hof == resumed.hof);
  CHECK(coevo_state_to_json(a).dump() == coevo_state_to_json(resumed).dump());
}

TEST_CASE("parallel evaluation matches serial evaluation") {
  Environment serial = small_env(6, 2);
  Environment threaded = serial;
  threaded.coevo.threads = 4;
  CoevoState a = make_coevo_state(serial);
  CoevoState b = make_coevo_state(threaded);
  evolve_round(a, serial);
  evolve_round(b, threaded);
  CHECK(a.hof == b.hof);
}

TEST_CASE("hall of fame entries are immutable across rounds") {
  const Environment env = small_env(5, 1);
  CoevoState state = make_coevo_state(env);
  evolve_round(state, env);
  const std::string first = neat::genome_to_string(state.hof.at(Role::kPredator2, 0));
  evolve_round(state, env);
  evolve_round(state, env);
  CHECK(neat::genome_to_string(state.hof.at(Role::kPredator2, 0)) == first);
}

TEST_CASE("roles") {
  for (Role r : kRoleCycle) CHECK(role_from_name(role_name(r)) == r);
  CHECK_THROWS_AS(role_from_name("wolf"), Error);
  CHECK(role_input_arity(Role::kPrey) == 8);
  CHECK(role_input_arity(Role::kPredator2) == 3);
}
