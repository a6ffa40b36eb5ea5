#include "neat/genome.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace predprey::neat {

using nlohmann::json;

namespace {

const char* role_name(NodeRole role) {
  switch (role) {
    case NodeRole::kInput: return "input";
    case NodeRole::kOutput: return "output";
    case NodeRole::kHidden: return "hidden";
  }
  return "hidden";
}

NodeRole role_from_name(const std::string& name) {
  if (name == "input") return NodeRole::kInput;
  if (name == "output") return NodeRole::kOutput;
  if (name == "hidden") return NodeRole::kHidden;
  throw Error(ErrorCode::kMalformed, "genome: unknown node role '" + name + "'");
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformed, "genome: " + what);
}

}  // namespace

const NodeGene* Genome::find_node(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeGene& n, int v) { return n.id < v; });
  return it != nodes.end() && it->id == id ? &*it : nullptr;
}

NodeGene* Genome::find_node(int id) {
  return const_cast<NodeGene*>(std::as_const(*this).find_node(id));
}

const ConnectionGene* Genome::find_connection(int from, int to) const {
  for (const auto& c : connections) {
    if (c.from == from && c.to == to) return &c;
  }
  return nullptr;
}

bool Genome::has_innovation(int innovation) const {
  auto it = std::lower_bound(connections.begin(), connections.end(), innovation,
                             [](const ConnectionGene& c, int v) { return c.innovation < v; });
  return it != connections.end() && it->innovation == innovation;
}

void Genome::sort_genes() {
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(connections.begin(), connections.end(),
            [](const auto& a, const auto& b) { return a.innovation < b.innovation; });
}

InnovationRegistry InnovationRegistry::for_arity(int inputs, int outputs) {
  InnovationRegistry r;
  for (int i = 0; i < inputs; ++i) {
    for (int o = 0; o < outputs; ++o) r.connections[{i, inputs + o}] = i * outputs + o;
  }
  r.next_innovation = inputs * outputs;
  r.next_node = inputs + outputs;
  return r;
}

int InnovationRegistry::connection_innovation(int from, int to) {
  auto [it, inserted] = connections.try_emplace({from, to}, next_innovation);
  if (inserted) ++next_innovation;
  return it->second;
}

InnovationRegistry::Split InnovationRegistry::split(const ConnectionGene& connection) {
  auto it = splits.find(connection.innovation);
  if (it != splits.end()) return it->second;
  Split s;
  s.node = next_node++;
  s.in_innovation = connection_innovation(connection.from, s.node);
  s.out_innovation = connection_innovation(s.node, connection.to);
  splits.emplace(connection.innovation, s);
  return s;
}

Genome make_minimal_genome(int inputs, int outputs, std::span<const double> weights,
                           InnovationRegistry& registry) {
  if (inputs <= 0 || outputs <= 0) throw Error(ErrorCode::kArity, "genome arity must be positive");
  if (weights.size() != static_cast<std::size_t>(inputs * outputs)) {
    throw Error(ErrorCode::kArity, "minimal genome needs inputs*outputs weights");
  }
  Genome g;
  g.input_arity = inputs;
  g.output_arity = outputs;
  for (int i = 0; i < inputs; ++i) g.nodes.push_back({i, NodeRole::kInput, 0.0});
  for (int o = 0; o < outputs; ++o) g.nodes.push_back({inputs + o, NodeRole::kOutput, 0.0});
  for (int i = 0; i < inputs; ++i) {
    for (int o = 0; o < outputs; ++o) {
      const int to = inputs + o;
      g.connections.push_back(
          {registry.connection_innovation(i, to), i, to, weights[i * outputs + o], true});
    }
  }
  g.sort_genes();
  return g;
}

void validate_genome(const Genome& g) {
  if (g.input_arity <= 0 || g.output_arity <= 0) malformed("arity must be positive");
  std::set<int> ids;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    const auto& n = g.nodes[k];
    if (k > 0 && g.nodes[k - 1].id >= n.id) malformed("node ids not strictly increasing");
    if (!std::isfinite(n.bias)) malformed("non-finite bias");
    const bool is_input = n.id < g.input_arity;
    const bool is_output = !is_input && n.id < g.input_arity + g.output_arity;
    const NodeRole expected = is_input ? NodeRole::kInput : is_output ? NodeRole::kOutput : NodeRole::kHidden;
    if (n.role != expected) malformed("node " + std::to_string(n.id) + " has the wrong role");
    ids.insert(n.id);
  }
  for (int id = 0; id < g.input_arity + g.output_arity; ++id) {
    if (!ids.count(id)) malformed("missing input/output node " + std::to_string(id));
  }
  std::set<std::pair<int, int>> pairs;
  std::map<int, std::vector<int>> edges;
  for (std::size_t k = 0; k < g.connections.size(); ++k) {
    const auto& c = g.connections[k];
    if (k > 0 && g.connections[k - 1].innovation >= c.innovation) {
      malformed("innovation ids not strictly increasing");
    }
    if (!ids.count(c.from) || !ids.count(c.to)) malformed("connection references a missing node");
    if (c.to < g.input_arity) malformed("input node with an incoming connection");
    if (!std::isfinite(c.weight)) malformed("non-finite weight");
    if (!pairs.insert({c.from, c.to}).second) malformed("duplicate connection pair");
    edges[c.from].push_back(c.to);
  }
  // Acyclicity over all genes, enabled or not, so re-enabling never creates a cycle.
  std::map<int, int> color;
  std::vector<std::pair<int, std::size_t>> stack;
  for (int root : ids) {
    if (color[root] != 0) continue;
    stack.push_back({root, 0});
    color[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& out = edges[node];
      if (next < out.size()) {
        const int child = out[next++];
        if (color[child] == 1) malformed("connection graph has a cycle");
        if (color[child] == 0) {
          color[child] = 1;
          stack.push_back({child, 0});
        }
      } else {
        color[node] = 2;
        stack.pop_back();
      }
    }
  }
}

Network::Network(const Genome& genome) : inputs_(genome.input_arity) {
  std::map<int, int> slot;
  for (const auto& n : genome.nodes) slot.emplace(n.id, static_cast<int>(slot.size()));
  slot_count_ = static_cast<int>(slot.size());

  std::map<int, std::vector<std::pair<int, double>>> incoming;
  std::map<int, int> indegree;
  std::map<int, std::vector<int>> outgoing;
  for (const auto& c : genome.connections) {
    if (!c.enabled) continue;
    incoming[c.to].push_back({slot.at(c.from), c.weight});
    outgoing[c.from].push_back(c.to);
    ++indegree[c.to];
  }
  // Kahn's algorithm; ties broken by node id for a stable evaluation order.
  std::set<int> ready;
  for (const auto& n : genome.nodes) {
    if (indegree[n.id] == 0) ready.insert(n.id);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (int to : outgoing[id]) {
      if (--indegree[to] == 0) ready.insert(to);
    }
  }
  if (order.size() != genome.nodes.size()) {
    throw Error(ErrorCode::kMalformed, "genome: enabled connections form a cycle");
  }
  for (int id : order) {
    const NodeGene* n = genome.find_node(id);
    if (n->role == NodeRole::kInput) continue;
    steps_.push_back({slot.at(id), n->bias, incoming[id]});
  }
  for (int o = 0; o < genome.output_arity; ++o) output_slots_.push_back(slot.at(inputs_ + o));
}

void Network::activate(std::span<const double> inputs, std::span<double> outputs) const {
  if (inputs.size() != static_cast<std::size_t>(inputs_)) {
    throw Error(ErrorCode::kArity, "network expects " + std::to_string(inputs_) + " inputs, got " +
                                       std::to_string(inputs.size()));
  }
  if (outputs.size() != output_slots_.size()) {
    throw Error(ErrorCode::kArity, "network output buffer has the wrong size");
  }
  // Input nodes occupy the first slots because node ids are sorted.
  std::vector<double> values(slot_count_, 0.0);
  std::copy(inputs.begin(), inputs.end(), values.begin());
  for (const auto& step : steps_) {
    double sum = step.bias;
    for (const auto& [src, w] : step.sources) sum += w * values[src];
    values[step.slot] = std::tanh(sum);
  }
  for (std::size_t o = 0; o < output_slots_.size(); ++o) outputs[o] = values[output_slots_[o]];
}

std::vector<double> Network::activate(std::span<const double> inputs) const {
  std::vector<double> out(output_slots_.size());
  activate(inputs, out);
  return out;
}

std::vector<double> activate(const Genome& genome, std::span<const double> inputs) {
  return Network(genome).activate(inputs);
}

json genome_to_json(const Genome& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back({{"id", n.id}, {"role", role_name(n.role)}, {"bias", n.bias}});
  json conns = json::array();
  for (const auto& c : g.connections) {
    conns.push_back({{"innovation", c.innovation},
                     {"from", c.from},
                     {"to", c.to},
                     {"weight", c.weight},
                     {"enabled", c.enabled}});
  }
  return {{"input_arity", g.input_arity},
          {"output_arity", g.output_arity},
          {"nodes", std::move(nodes)},
          {"connections", std::move(conns)}};
}

Genome genome_from_json(const json& doc) {
  Genome g;
  try {
    g.input_arity = doc.at("input_arity").get<int>();
    g.output_arity = doc.at("output_arity").get<int>();
    for (const auto& n : doc.at("nodes")) {
      g.nodes.push_back({n.at("id").get<int>(), role_from_name(n.at("role").get<std::string>()),
                         n.at("bias").get<double>()});
    }
    for (const auto& c : doc.at("connections")) {
      g.connections.push_back({c.at("innovation").get<int>(), c.at("from").get<int>(),
                               c.at("to").get<int>(), c.at("weight").get<double>(),
                               c.at("enabled").get<bool>()});
    }
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  g.sort_genes();
  validate_genome(g);
  return g;
}

std::string genome_to_string(const Genome& genome) { return genome_to_json(genome).dump(2) + "\n"; }

Genome genome_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  return genome_from_json(doc);
}

void save_genome(const Genome& genome, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << genome_to_string(genome);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

Genome load_genome(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInventory, "missing genome file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return genome_from_string(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

json registry_to_json(const InnovationRegistry& r) {
  json conns = json::array();
  for (const auto& [key, id] : r.connections) conns.push_back({key.first, key.second, id});
  json splits = json::array();
  for (const auto& [innov, s] : r.splits) {
    splits.push_back({innov, s.node, s.in_innovation, s.out_innovation});
  }
  return {{"next_innovation", r.next_innovation},
          {"next_node", r.next_node},
          {"connections", std::move(conns)},
          {"splits", std::move(splits)}};
}

InnovationRegistry registry_from_json(const json& doc) {
  InnovationRegistry r;
  try {
    r.next_innovation = doc.at("next_innovation").get<int>();
    r.next_node = doc.at("next_node").get<int>();
    for (const auto& c : doc.at("connections")) r.connections[{c.at(0).get<int>(), c.at(1).get<int>()}] = c.at(2).get<int>();
    for (const auto& s : doc.at("splits")) {
      r.splits[s.at(0).get<int>()] = {s.at(1).get<int>(), s.at(2).get<int>(), s.at(3).get<int>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("innovation registry: ") + e.what());
  }
  return r;
}

}  // namespace predprey::neat
