#include "runs/evolve.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "json.hpp"
#include "runs/layout.hpp"

namespace predprey {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

// Keeps only the log lines whose generation is below `generation`.
void truncate_log(const fs::path& path, int generation) {
  if (!fs::exists(path)) return;
  std::istringstream in(read_file(path));
  std::string kept;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      if (json::parse(line).at("generation").get<int>() < generation) kept += line + "\n";
    } catch (const json::exception&) {
      // A torn final line from an interrupted write.
    }
  }
  write_file_atomic(path, kept);
}

void truncate_hof(const RunLayout& layout, int generation) {
  for (Role r : kRoleCycle) {
    for (int g = generation;; ++g) {
      const fs::path p = layout.hof_genome(r, g);
      if (!fs::exists(p)) break;
      fs::remove(p);
    }
  }
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
  out << line << '\n';
}

void save_checkpoint(const RunLayout& layout, const CoevoState& state) {
  write_file_atomic(layout.checkpoint(), coevo_state_to_json(state).dump() + "\n");
}

CoevoState load_checkpoint(const RunLayout& layout) {
  try {
    return coevo_state_from_json(json::parse(read_file(layout.checkpoint())));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, layout.checkpoint().string() + ": " + e.what());
  }
}

}  // namespace

void request_stop() noexcept { g_stop.store(true); }
void clear_stop_request() noexcept { g_stop.store(false); }
bool stop_requested() noexcept { return g_stop.load(); }

EvolveResult evolve_run(const RunConfig& config, const EvolveOptions& options) {
  config.validate();
  Environment env = config.env;
  env.coevo.threads = config.threads;
  const RunLayout layout{config.output_dir};
  const std::string hash = config_hash(config);
  const int target = env.neat.generations;

  CoevoState state;
  Manifest manifest;
  std::optional<RunLock> lock;
  if (options.resume) {
    if (!fs::exists(layout.manifest())) {
      throw Error(ErrorCode::kResumeMismatch, "nothing to resume in " + layout.root.string());
    }
    manifest = read_manifest(layout);
    if (manifest.config_hash != hash) {
      throw Error(ErrorCode::kResumeMismatch, "config hash " + hash + " does not match run " +
                                                   manifest.config_hash + " in " + layout.root.string());
    }
    lock.emplace(layout.lock());
    state = load_checkpoint(layout);
    truncate_log(layout.generation_log(), state.generation);
    truncate_log(layout.timing_log(), state.generation);
    truncate_hof(layout, state.generation);
  } else {
    if (fs::exists(layout.manifest())) {
      throw Error(ErrorCode::kArgument, layout.root.string() +
                                            " already holds a run; use --resume or another output directory");
    }
    std::error_code ec;
    fs::create_directories(layout.root, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + layout.root.string() + ": " + ec.message());
    lock.emplace(layout.lock());
    for (Role r : kRoleCycle) fs::create_directories(layout.hof_dir(r));
    write_file_atomic(layout.config(), emit_run_config(config, false));
    write_file_atomic(layout.generation_log(), "");
    write_file_atomic(layout.timing_log(), "");
    state = make_coevo_state(env);
    save_checkpoint(layout, state);
    manifest.config_hash = hash;
    manifest.generations_target = target;
    write_manifest(layout, manifest);
  }

  EvolveResult result;
  result.run_dir = layout.root.string();
  int done_here = 0;
  while (state.generation < target) {
    if (stop_requested() || (options.stop_after && done_here >= *options.stop_after)) {
      result.interrupted = true;
      break;
    }
    const int generation = state.generation;
    evolve_round(state, env, [&](const GenerationRecord& rec) {
      append_line(layout.generation_log(), record_to_json(rec).dump());
      append_line(layout.timing_log(), json{{"generation", rec.generation},
                                            {"role", role_name(rec.role)},
                                            {"wall_seconds", rec.wall_seconds}}
                                           .dump());
    });
    for (Role r : kRoleCycle) {
      write_file_atomic(layout.hof_genome(r, generation),
                        neat::genome_to_string(state.hof.at(r, generation)));
    }
    save_checkpoint(layout, state);
    manifest.generations_completed = state.generation;
    manifest.complete = state.generation >= target;
    write_manifest(layout, manifest);
    ++done_here;
    if (options.progress) options.progress(state.generation, target);
  }
  result.generations_completed = state.generation;
  result.complete = state.generation >= target;
  if (result.complete && !manifest.complete) {
    manifest.complete = true;
    manifest.generations_completed = state.generation;
    write_manifest(layout, manifest);
  }
  return result;
}

}  // namespace predprey
