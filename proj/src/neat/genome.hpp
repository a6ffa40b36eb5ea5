#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace predprey::neat {

enum class NodeRole { kInput, kOutput, kHidden };

struct NodeGene {
  int id = 0;
  NodeRole role = NodeRole::kHidden;
  double bias = 0.0;

  bool operator==(const NodeGene&) const = default;
};

struct ConnectionGene {
  int innovation = 0;
  int from = 0;
  int to = 0;
  double weight = 0.0;
  bool enabled = true;

  bool operator==(const ConnectionGene&) const = default;
};

// Node ids 0..inputs-1 are inputs, inputs..inputs+outputs-1 are outputs and
// hidden nodes use ids handed out by an InnovationRegistry. Both gene lists are
// kept sorted (nodes by id, connections by innovation).
struct Genome {
  int input_arity = 0;
  int output_arity = 0;
  std::vector<NodeGene> nodes;
  std::vector<ConnectionGene> connections;

  bool operator==(const Genome&) const = default;

  const NodeGene* find_node(int id) const;
  NodeGene* find_node(int id);
  const ConnectionGene* find_connection(int from, int to) const;
  bool has_innovation(int innovation) const;
  void sort_genes();
};

// Historical markings. Mappings are permanent for the lifetime of a
// population, so identical structural mutations always share ids.
struct InnovationRegistry {
  struct Split {
    int node = 0;
    int in_innovation = 0;
    int out_innovation = 0;
  };

  std::map<std::pair<int, int>, int> connections;
  std::map<int, Split> splits;  // keyed by the split connection's innovation
  int next_innovation = 0;
  int next_node = 0;

  // Reserves ids for a fully connected inputs->outputs starting topology.
  static InnovationRegistry for_arity(int inputs, int outputs);

  int connection_innovation(int from, int to);
  Split split(const ConnectionGene& connection);
};

// Fully connected input->output genome without hidden nodes; weights are
// supplied in (input-major) order, biases start at zero.
Genome make_minimal_genome(int inputs, int outputs, std::span<const double> weights,
                           InnovationRegistry& registry);

// Checks every structural invariant; throws Error(kMalformed) on violation.
void validate_genome(const Genome& genome);

// Feed-forward evaluator compiled from a genome's enabled connections.
class Network {
 public:
  explicit Network(const Genome& genome);

  int input_arity() const { return inputs_; }
  int output_arity() const { return static_cast<int>(output_slots_.size()); }

  // Throws Error(kArity) when inputs.size() != input_arity().
  std::vector<double> activate(std::span<const double> inputs) const;
  void activate(std::span<const double> inputs, std::span<double> outputs) const;

 private:
  struct Step {
    int slot;
    double bias;
    std::vector<std::pair<int, double>> sources;  // (slot, weight)
  };

  int inputs_ = 0;
  int slot_count_ = 0;
  std::vector<Step> steps_;
  std::vector<int> output_slots_;
};

std::vector<double> activate(const Genome& genome, std::span<const double> inputs);

nlohmann::json genome_to_json(const Genome& genome);
Genome genome_from_json(const nlohmann::json& doc);
std::string genome_to_string(const Genome& genome);
Genome genome_from_string(const std::string& text);
void save_genome(const Genome& genome, const std::string& path);
Genome load_genome(const std::string& path);

nlohmann::json registry_to_json(const InnovationRegistry& registry);
InnovationRegistry registry_from_json(const nlohmann::json& doc);

}  // namespace predprey::neat
