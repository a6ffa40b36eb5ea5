#pragma once

#include <span>
#include <vector>

#include "common/rng.hpp"
#include "neat/genome.hpp"

namespace predprey::neat {

struct NeatConfig {
  // Main parameters.
  int population_size = 20;
  int generations = 100;
  double weight_mutate_rate = 0.8;
  double bias_mutate_rate = 0.7;
  double p_add_connection = 0.1;
  double p_delete_connection = 0.1;
  double p_add_node = 0.1;
  double p_delete_node = 0.1;
  int elites = 4;

  // Speciation.
  double c1_excess = 1.0;
  double c2_disjoint = 1.0;
  double c3_weight = 0.4;
  double compatibility_threshold = 3.0;
  int stagnation_limit = 15;

  // Weight and bias perturbation.
  double weight_perturb_stddev = 0.5;
  double weight_replace_prob = 0.1;
  double weight_replace_range = 3.0;
  double weight_clamp = 8.0;
  double bias_perturb_stddev = 0.5;
  double initial_weight_range = 1.0;

  // Reproduction.
  double crossover_rate = 0.75;
  double inherit_disabled_prob = 0.75;

  void validate() const;
};

struct Species {
  int id = 0;
  Genome representative;
  std::vector<int> members;  // indices into Population::members
  double best_fitness = 0.0;
  int staleness = 0;
};

struct Population {
  int input_arity = 0;
  int output_arity = 0;
  int generation = 0;
  std::vector<Genome> members;
  std::vector<Species> species;
  InnovationRegistry registry;
  int next_species_id = 0;
};

// Fully connected minimal genomes, weights uniform in +-initial_weight_range.
Population make_population(int inputs, int outputs, const NeatConfig& config, Rng& rng);

Genome mutate(Genome genome, const NeatConfig& config, InnovationRegistry& registry, Rng& rng);

// Throws Error(kArity) when the parents' arities differ.
Genome crossover(const Genome& parent_a, const Genome& parent_b, double fitness_a,
                 double fitness_b, Rng& rng, double inherit_disabled_prob = 0.75);

double compatibility_distance(const Genome& a, const Genome& b, const NeatConfig& config);

// Fitness-proportionate pick; uniform when every (shifted) fitness is zero.
std::size_t select_proportional(std::span<const double> fitnesses, Rng& rng);

// Assigns every member to a species (greedy, first representative within the
// threshold). Existing species keep their representatives.
void speciate(Population& population, const NeatConfig& config);

// Replaces population.members with the next generation. The `elites` fittest
// genomes come first, unchanged. Throws Error(kGeneration) on an empty
// population, a size mismatch, or a non-finite fitness.
void next_generation(Population& population, std::span<const double> fitnesses,
                     const NeatConfig& config, Rng& rng);

nlohmann::json population_to_json(const Population& population);
Population population_from_json(const nlohmann::json& doc);

}  // namespace predprey::neat
