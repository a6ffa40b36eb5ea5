#include "runs/layout.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "json.hpp"

namespace predprey {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path RunLayout::hof_genome(Role role, int generation) const {
  char name[32];
  std::snprintf(name, sizeof name, "gen_%04d.json", generation);
  return hof_dir(role) / name;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

Manifest read_manifest(const RunLayout& layout) {
  const std::string text = read_file(layout.manifest());
  try {
    const json doc = json::parse(text);
    Manifest m;
    m.artifact_version = doc.at("artifact_version").get<int>();
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.generations_target = doc.at("generations_target").get<int>();
    m.generations_completed = doc.at("generations_completed").get<int>();
    m.complete = doc.at("complete").get<bool>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, layout.manifest().string() + ": " + e.what());
  }
}

void write_manifest(const RunLayout& layout, const Manifest& m) {
  const json doc = {{"artifact_version", m.artifact_version},
                    {"config_hash", m.config_hash},
                    {"generations_target", m.generations_target},
                    {"generations_completed", m.generations_completed},
                    {"complete", m.complete}};
  write_file_atomic(layout.manifest(), doc.dump(2) + "\n");
}

RunLock::RunLock(fs::path path) : path_(std::move(path)) {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::kLocked, path_.string() +
                                          " exists: another process is using this run directory "
                                          "(delete the file if that process is gone)");
    }
    throw Error(ErrorCode::kIo, "cannot create " + path_.string());
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

RunConfig load_run_dir_config(const RunLayout& layout) {
  if (!fs::exists(layout.config())) {
    throw Error(ErrorCode::kInventory, layout.root.string() + " is not a run directory (no config.ini)");
  }
  RunConfig config = load_run_config(layout.config().string());
  config.output_dir = layout.root.string();
  return config;
}

neat::Genome load_hof_genome(const RunLayout& layout, Role role, int generation) {
  const fs::path path = layout.hof_genome(role, generation);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kInventory, "no genome for generation " + std::to_string(generation) +
                                           " role " + role_name(role) + " (" + path.string() + ")");
  }
  return neat::load_genome(path.string());
}

int inventory_generations(const RunLayout& layout) {
  int g = 0;
  for (;; ++g) {
    for (Role r : kRoleCycle) {
      if (!fs::exists(layout.hof_genome(r, g))) return g;
    }
  }
}

}  // namespace predprey
