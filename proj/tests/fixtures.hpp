#pragma once

// Hand-written controllers and run directories for tests that need genomes
// with predictable behavior.

#include <filesystem>

#include "coevo/coevo.hpp"
#include "runs/config.hpp"
#include "runs/layout.hpp"

namespace fixtures {

using namespace predprey;

inline neat::Genome chaser(double speed) {
  auto reg = neat::InnovationRegistry::for_arity(3, 2);
  // Steers toward the image bearing: positive x_image (target to the right)
  // speeds up the left wheel.
  auto g = neat::make_minimal_genome(3, 2, std::vector<double>{2.0, -2.0, 0.0, 0.0, 0.0, 0.0}, reg);
  g.find_node(3)->bias = speed;
  g.find_node(4)->bias = speed;
  return g;
}

inline neat::Genome idle(int inputs) {
  auto reg = neat::InnovationRegistry::for_arity(inputs, 2);
  return neat::make_minimal_genome(inputs, 2, std::vector<double>(inputs * 2, 0.0), reg);
}

inline neat::Genome runner() {
  auto g = idle(8);
  g.find_node(8)->bias = 1.0;
  g.find_node(9)->bias = 0.9;
  return g;
}

// A run directory with hand-written genomes: predator speed grows with the
// generation, prey alternates between sitting still and circling.
inline void make_run_dir(const std::filesystem::path& dir, int generations) {
  RunConfig c = default_run_config();
  c.env.neat.generations = generations;
  c.output_dir = dir.string();
  const RunLayout layout{dir};
  for (Role r : kRoleCycle) std::filesystem::create_directories(layout.hof_dir(r));
  write_file_atomic(layout.config(), emit_run_config(c, false));
  Manifest m;
  m.config_hash = config_hash(c);
  m.generations_target = generations;
  m.generations_completed = generations;
  m.complete = true;
  write_manifest(layout, m);
  for (int g = 0; g < generations; ++g) {
    for (int i = 0; i < kPredatorCount; ++i) {
      write_file_atomic(layout.hof_genome(predator_role(i), g), neat::genome_to_string(chaser(0.2 + 0.15 * g)));
    }
    write_file_atomic(layout.hof_genome(Role::kPrey, g), neat::genome_to_string(g % 2 ? runner() : idle(8)));
  }
}

}  // namespace fixtures
