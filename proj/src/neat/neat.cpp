#include "neat/neat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "common/error.hpp"

namespace predprey::neat {

using nlohmann::json;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kConfig, std::string("neat config: ") + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// True when `target` is reachable from `start` over all connection genes.
bool reachable(const Genome& g, int start, int target) {
  std::vector<int> stack{start};
  std::set<int> seen{start};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (node == target) return true;
    for (const auto& c : g.connections) {
      if (c.from == node && seen.insert(c.to).second) stack.push_back(c.to);
    }
  }
  return false;
}

bool try_add_connection(Genome& g, InnovationRegistry& registry, Rng& rng) {
  std::vector<int> sources;
  std::vector<int> targets;
  for (const auto& n : g.nodes) {
    if (n.role != NodeRole::kOutput) sources.push_back(n.id);
    if (n.role != NodeRole::kInput) targets.push_back(n.id);
  }
  // One redraw after a rejected pair, then give up for this mutation.
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int from = sources[rng.index(sources.size())];
    const int to = targets[rng.index(targets.size())];
    if (from == to || g.find_connection(from, to) || reachable(g, to, from)) continue;
    const int innovation = registry.connection_innovation(from, to);
    if (g.has_innovation(innovation)) continue;
    g.connections.push_back({innovation, from, to, 0.0, true});
    g.connections.back().weight = rng.uniform(-1.0, 1.0);
    g.sort_genes();
    return true;
  }
  return false;
}

bool try_add_node(Genome& g, InnovationRegistry& registry, Rng& rng) {
  std::vector<std::size_t> enabled;
  for (std::size_t k = 0; k < g.connections.size(); ++k) {
    if (g.connections[k].enabled) enabled.push_back(k);
  }
  if (enabled.empty()) return false;
  ConnectionGene& old = g.connections[enabled[rng.index(enabled.size())]];
  const InnovationRegistry::Split split = registry.split(old);
  if (g.find_node(split.node) || g.has_innovation(split.in_innovation) ||
      g.has_innovation(split.out_innovation)) {
    return false;
  }
  old.enabled = false;
  const ConnectionGene copy = old;
  g.nodes.push_back({split.node, NodeRole::kHidden, 0.0});
  g.connections.push_back({split.in_innovation, copy.from, split.node, 1.0, true});
  g.connections.push_back({split.out_innovation, split.node, copy.to, copy.weight, true});
  g.sort_genes();
  return true;
}

bool try_delete_node(Genome& g, Rng& rng) {
  std::vector<int> hidden;
  for (const auto& n : g.nodes) {
    if (n.role == NodeRole::kHidden) hidden.push_back(n.id);
  }
  if (hidden.empty()) return false;
  const int victim = hidden[rng.index(hidden.size())];
  std::erase_if(g.nodes, [victim](const NodeGene& n) { return n.id == victim; });
  std::erase_if(g.connections,
                [victim](const ConnectionGene& c) { return c.from == victim || c.to == victim; });
  return true;
}

void check_fitnesses(const Population& population, std::span<const double> fitnesses) {
  if (population.members.empty()) throw Error(ErrorCode::kGeneration, "empty population");
  if (fitnesses.size() != population.members.size()) {
    throw Error(ErrorCode::kGeneration, "fitness count does not match population size");
  }
  for (double f : fitnesses) {
    if (!std::isfinite(f)) throw Error(ErrorCode::kGeneration, "non-finite fitness");
  }
}

// Largest-remainder apportionment of `total` slots by `weights`.
std::vector<int> apportion(const std::vector<double>& weights, int total) {
  std::vector<int> quota(weights.size(), 0);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || total <= 0) return quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    const double exact = sum > 0.0 ? total * weights[s] / sum : double(total) / weights.size();
    quota[s] = static_cast<int>(std::floor(exact));
    assigned += quota[s];
    remainders.push_back({exact - quota[s], s});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % remainders.size()) {
    ++quota[remainders[k].second];
    ++assigned;
  }
  return quota;
}

}  // namespace

void NeatConfig::validate() const {
  require(population_size >= 2, "population_size must be >= 2");
  require(generations >= 1, "generations must be >= 1");
  require(elites >= 0 && elites < population_size, "elites must be in [0, population_size)");
  for (double p : {weight_mutate_rate, bias_mutate_rate, p_add_connection, p_delete_connection,
                   p_add_node, p_delete_node, weight_replace_prob, crossover_rate,
                   inherit_disabled_prob}) {
    require(is_probability(p), "probabilities must lie in [0, 1]");
  }
  require(c1_excess >= 0.0 && c2_disjoint >= 0.0 && c3_weight >= 0.0,
          "compatibility coefficients must be >= 0");
  require(compatibility_threshold > 0.0, "compatibility_threshold must be > 0");
  require(stagnation_limit >= 1, "stagnation_limit must be >= 1");
  require(weight_perturb_stddev >= 0.0 && bias_perturb_stddev >= 0.0, "stddev must be >= 0");
  require(weight_clamp > 0.0 && weight_replace_range > 0.0 && initial_weight_range >= 0.0,
          "weight ranges must be positive");
}

Population make_population(int inputs, int outputs, const NeatConfig& config, Rng& rng) {
  Population pop;
  pop.input_arity = inputs;
  pop.output_arity = outputs;
  pop.registry = InnovationRegistry::for_arity(inputs, outputs);
  std::vector<double> weights(static_cast<std::size_t>(inputs * outputs));
  for (int k = 0; k < config.population_size; ++k) {
    for (double& w : weights) w = rng.uniform(-config.initial_weight_range, config.initial_weight_range);
    pop.members.push_back(make_minimal_genome(inputs, outputs, weights, pop.registry));
  }
  return pop;
}

Genome mutate(Genome g, const NeatConfig& config, InnovationRegistry& registry, Rng& rng) {
  if (rng.bernoulli(config.weight_mutate_rate)) {
    for (auto& c : g.connections) {
      if (rng.bernoulli(config.weight_replace_prob)) {
        c.weight = rng.uniform(-config.weight_replace_range, config.weight_replace_range);
      } else {
        c.weight += rng.normal(0.0, config.weight_perturb_stddev);
      }
      c.weight = std::clamp(c.weight, -config.weight_clamp, config.weight_clamp);
    }
  }
  if (rng.bernoulli(config.bias_mutate_rate)) {
    for (auto& n : g.nodes) {
      if (n.role == NodeRole::kInput) continue;
      n.bias = std::clamp(n.bias + rng.normal(0.0, config.bias_perturb_stddev), -config.weight_clamp,
                          config.weight_clamp);
    }
  }
  if (rng.bernoulli(config.p_add_connection)) try_add_connection(g, registry, rng);
  if (rng.bernoulli(config.p_delete_connection) && !g.connections.empty()) {
    g.connections.erase(g.connections.begin() +
                        static_cast<std::ptrdiff_t>(rng.index(g.connections.size())));
  }
  if (rng.bernoulli(config.p_add_node)) try_add_node(g, registry, rng);
  if (rng.bernoulli(config.p_delete_node)) try_delete_node(g, rng);
  return g;
}

Genome crossover(const Genome& parent_a, const Genome& parent_b, double fitness_a,
                 double fitness_b, Rng& rng, double inherit_disabled_prob) {
  if (parent_a.input_arity != parent_b.input_arity ||
      parent_a.output_arity != parent_b.output_arity) {
    throw Error(ErrorCode::kArity, "crossover: parents have different arities");
  }
  bool a_primary = fitness_a > fitness_b;
  if (fitness_a == fitness_b) a_primary = rng.bernoulli(0.5);
  const Genome& primary = a_primary ? parent_a : parent_b;
  const Genome& other = a_primary ? parent_b : parent_a;

  // The child's gene set is exactly the primary parent's, which keeps the
  // structural invariants of that parent.
  Genome child;
  child.input_arity = primary.input_arity;
  child.output_arity = primary.output_arity;
  for (const auto& n : primary.nodes) {
    NodeGene gene = n;
    if (const NodeGene* match = other.find_node(n.id); match && rng.bernoulli(0.5)) {
      gene.bias = match->bias;
    }
    child.nodes.push_back(gene);
  }
  std::size_t k = 0;
  for (const auto& c : primary.connections) {
    while (k < other.connections.size() && other.connections[k].innovation < c.innovation) ++k;
    const ConnectionGene* match =
        k < other.connections.size() && other.connections[k].innovation == c.innovation
            ? &other.connections[k]
            : nullptr;
    ConnectionGene gene = c;
    bool disabled_somewhere = !c.enabled;
    if (match) {
      if (rng.bernoulli(0.5)) gene.weight = match->weight;
      disabled_somewhere = disabled_somewhere || !match->enabled;
    }
    gene.enabled = disabled_somewhere ? !rng.bernoulli(inherit_disabled_prob) : true;
    child.connections.push_back(gene);
  }
  return child;
}

double compatibility_distance(const Genome& a, const Genome& b, const NeatConfig& config) {
  const auto& ca = a.connections;
  const auto& cb = b.connections;
  const int max_a = ca.empty() ? -1 : ca.back().innovation;
  const int max_b = cb.empty() ? -1 : cb.back().innovation;
  std::size_t i = 0;
  std::size_t j = 0;
  int matching = 0;
  int disjoint = 0;
  int excess = 0;
  double weight_diff = 0.0;
  while (i < ca.size() || j < cb.size()) {
    if (i < ca.size() && j < cb.size() && ca[i].innovation == cb[j].innovation) {
      weight_diff += std::abs(ca[i].weight - cb[j].weight);
      ++matching;
      ++i;
      ++j;
    } else if (j >= cb.size() || (i < ca.size() && ca[i].innovation < cb[j].innovation)) {
      (ca[i].innovation > max_b ? excess : disjoint) += 1;
      ++i;
    } else {
      (cb[j].innovation > max_a ? excess : disjoint) += 1;
      ++j;
    }
  }
  const std::size_t larger = std::max(ca.size(), cb.size());
  const double n = larger < 20 ? 1.0 : static_cast<double>(larger);
  const double mean_weight = matching > 0 ? weight_diff / matching : 0.0;
  return config.c1_excess * excess / n + config.c2_disjoint * disjoint / n +
         config.c3_weight * mean_weight;
}

std::size_t select_proportional(std::span<const double> fitnesses, Rng& rng) {
  const double lowest = *std::min_element(fitnesses.begin(), fitnesses.end());
  const double shift = lowest < 0.0 ? -lowest : 0.0;
  double total = 0.0;
  for (double f : fitnesses) total += f + shift;
  if (!(total > 0.0)) return rng.index(fitnesses.size());
  double r = rng.uniform() * total;
  for (std::size_t k = 0; k < fitnesses.size(); ++k) {
    r -= fitnesses[k] + shift;
    if (r < 0.0) return k;
  }
  return fitnesses.size() - 1;
}

void speciate(Population& population, const NeatConfig& config) {
  for (auto& s : population.species) s.members.clear();
  for (std::size_t i = 0; i < population.members.size(); ++i) {
    const Genome& g = population.members[i];
    bool placed = false;
    for (auto& s : population.species) {
      if (compatibility_distance(g, s.representative, config) < config.compatibility_threshold) {
        s.members.push_back(static_cast<int>(i));
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species s;
      s.id = population.next_species_id++;
      s.representative = g;
      s.members.push_back(static_cast<int>(i));
      s.best_fitness = -std::numeric_limits<double>::infinity();
      population.species.push_back(std::move(s));
    }
  }
  std::erase_if(population.species, [](const Species& s) { return s.members.empty(); });
}

void next_generation(Population& population, std::span<const double> fitnesses,
                     const NeatConfig& config, Rng& rng) {
  check_fitnesses(population, fitnesses);
  speciate(population, config);

  std::vector<int> ranked(population.members.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](int a, int b) { return fitnesses[a] > fitnesses[b]; });
  const int size = config.population_size;
  const int elite_count = std::min<int>(config.elites, static_cast<int>(ranked.size()));
  const std::set<int> elite_set(ranked.begin(), ranked.begin() + elite_count);

  for (auto& s : population.species) {
    double best = -std::numeric_limits<double>::infinity();
    for (int m : s.members) best = std::max(best, fitnesses[m]);
    if (best > s.best_fitness) {
      s.best_fitness = best;
      s.staleness = 0;
    } else {
      ++s.staleness;
    }
  }
  std::erase_if(population.species, [&](const Species& s) {
    if (s.staleness < config.stagnation_limit) return false;
    return std::none_of(s.members.begin(), s.members.end(),
                        [&](int m) { return elite_set.count(m) > 0; });
  });
  // With no elites every species may stagnate at once; keep the fittest one.
  if (population.species.empty()) {
    Species s;
    s.id = population.next_species_id++;
    s.representative = population.members[ranked.front()];
    s.members = ranked;
    s.best_fitness = fitnesses[ranked.front()];
    population.species.push_back(std::move(s));
  }

  const double lowest = *std::min_element(fitnesses.begin(), fitnesses.end());
  const double shift = lowest < 0.0 ? -lowest : 0.0;
  std::vector<double> species_score;
  for (const auto& s : population.species) {
    double sum = 0.0;
    for (int m : s.members) sum += fitnesses[m] + shift;
    species_score.push_back(sum / static_cast<double>(s.members.size()));
  }
  const std::vector<int> quota = apportion(species_score, size - elite_count);

  std::vector<Genome> next;
  next.reserve(static_cast<std::size_t>(size));
  for (int k = 0; k < elite_count; ++k) next.push_back(population.members[ranked[k]]);

  for (std::size_t s = 0; s < population.species.size(); ++s) {
    const Species& sp = population.species[s];
    std::vector<double> local;
    for (int m : sp.members) local.push_back(fitnesses[m]);
    for (int q = 0; q < quota[s]; ++q) {
      const int a = sp.members[select_proportional(local, rng)];
      Genome child;
      if (rng.bernoulli(config.crossover_rate)) {
        const int b = sp.members[select_proportional(local, rng)];
        child = crossover(population.members[a], population.members[b], fitnesses[a], fitnesses[b],
                          rng, config.inherit_disabled_prob);
      } else {
        child = population.members[a];
      }
      next.push_back(mutate(std::move(child), config, population.registry, rng));
    }
  }

  for (auto& sp : population.species) {
    int best = sp.members.front();
    for (int m : sp.members) {
      if (fitnesses[m] > fitnesses[best]) best = m;
    }
    sp.representative = population.members[best];
    sp.members.clear();
  }
  population.members = std::move(next);
  ++population.generation;
}

json population_to_json(const Population& p) {
  json members = json::array();
  for (const auto& g : p.members) members.push_back(genome_to_json(g));
  json species = json::array();
  for (const auto& s : p.species) {
    species.push_back({{"id", s.id},
                       {"representative", genome_to_json(s.representative)},
                       {"best_fitness", s.best_fitness},
                       {"staleness", s.staleness}});
  }
  return {{"input_arity", p.input_arity},
          {"output_arity", p.output_arity},
          {"generation", p.generation},
          {"next_species_id", p.next_species_id},
          {"registry", registry_to_json(p.registry)},
          {"members", std::move(members)},
          {"species", std::move(species)}};
}

Population population_from_json(const json& doc) {
  Population p;
  try {
    p.input_arity = doc.at("input_arity").get<int>();
    p.output_arity = doc.at("output_arity").get<int>();
    p.generation = doc.at("generation").get<int>();
    p.next_species_id = doc.at("next_species_id").get<int>();
    p.registry = registry_from_json(doc.at("registry"));
    for (const auto& g : doc.at("members")) p.members.push_back(genome_from_json(g));
    for (const auto& s : doc.at("species")) {
      Species sp;
      sp.id = s.at("id").get<int>();
      sp.representative = genome_from_json(s.at("representative"));
      sp.best_fitness = s.at("best_fitness").get<double>();
      sp.staleness = s.at("staleness").get<int>();
      p.species.push_back(std::move(sp));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("population: ") + e.what());
  }
  return p;
}

}  // namespace predprey::neat
