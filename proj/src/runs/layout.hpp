#pragma once

#include <filesystem>
#include <string>

#include "coevo/coevo.hpp"
#include "runs/config.hpp"

namespace predprey {

inline constexpr int kArtifactVersion = 1;

// Paths inside a run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.ini"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path checkpoint() const { return root / "checkpoint.json"; }
  std::filesystem::path generation_log() const { return root / "generation_log.jsonl"; }
  std::filesystem::path timing_log() const { return root / "timing.jsonl"; }
  std::filesystem::path lock() const { return root / "run.lock"; }
  std::filesystem::path hof_dir(Role role) const { return root / "hof" / role_name(role); }
  std::filesystem::path hof_genome(Role role, int generation) const;
};

struct Manifest {
  int artifact_version = kArtifactVersion;
  std::string config_hash;
  int generations_target = 0;
  int generations_completed = 0;
  bool complete = false;
};

Manifest read_manifest(const RunLayout& layout);  // Error(kIo) / Error(kMalformed)
void write_manifest(const RunLayout& layout, const Manifest& manifest);

// Writes through a temporary file and a rename, so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);  // Error(kIo)

// Exclusive marker file held for the lifetime of the object. Throws
// Error(kLocked) if another process holds it.
class RunLock {
 public:
  explicit RunLock(std::filesystem::path path);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Loads the run's config snapshot.
RunConfig load_run_dir_config(const RunLayout& layout);

// Hall-of-fame genome of a role at a generation; Error(kInventory) naming the
// generation and role when absent.
neat::Genome load_hof_genome(const RunLayout& layout, Role role, int generation);

// Number of generations for which every role has a stored genome.
int inventory_generations(const RunLayout& layout);

}  // namespace predprey
