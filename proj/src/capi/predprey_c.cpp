#include "predprey/predprey.h"

#include <cstring>
#include <string>

#include "common/error.hpp"
#include "live/server.hpp"
#include "runs/config.hpp"
#include "runs/evolve.hpp"
#include "runs/replay.hpp"
#include "tournament/tournament.hpp"

struct pp_genome {
  predprey::neat::Genome genome;
  predprey::neat::Network network;
};

struct pp_episode {
  predprey::EpisodeOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
pp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PP_OK;
  } catch (const predprey::Error& e) {
    g_last_error = e.what();
    return static_cast<pp_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return PP_E_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw predprey::Error(predprey::ErrorCode::kArgument, what);
}

void copy_text(const std::string& text, char* buffer, size_t capacity, size_t* length) {
  if (length) *length = text.size();
  if (!buffer || capacity == 0) return;
  const size_t n = std::min(capacity - 1, text.size());
  std::memcpy(buffer, text.data(), n);
  buffer[n] = '\0';
}

predprey::RunConfig resolve_config(const char* path, const char* profile) {
  if (path && *path) return predprey::load_run_config(path);
  const std::string name = profile ? profile : "default";
  if (name == "default") return predprey::default_run_config();
  if (name == "smoke") return predprey::smoke_run_config();
  throw predprey::Error(predprey::ErrorCode::kArgument, "unknown profile '" + name + "' (default, smoke)");
}

}  // namespace

extern "C" {

const char* pp_version(void) { return "0.1.0"; }

const char* pp_status_name(pp_status status) {
  if (status == PP_OK) return "OK";
  if (status < PP_E_CONFIG || status > PP_E_INTERNAL) return "E_UNKNOWN";
  return predprey::error_code_name(static_cast<predprey::ErrorCode>(status));
}

const char* pp_last_error(void) { return g_last_error.c_str(); }

pp_status pp_genome_load(const char* path, pp_genome** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    auto genome = predprey::neat::load_genome(path);
    predprey::neat::Network net(genome);
    *out = new pp_genome{std::move(genome), std::move(net)};
  });
}

pp_status pp_genome_parse(const char* json_text, pp_genome** out) {
  return guarded([&] {
    require(json_text && out, "text and out are required");
    auto genome = predprey::neat::genome_from_string(json_text);
    predprey::neat::Network net(genome);
    *out = new pp_genome{std::move(genome), std::move(net)};
  });
}

void pp_genome_free(pp_genome* genome) { delete genome; }

int pp_genome_input_arity(const pp_genome* genome) { return genome ? genome->genome.input_arity : -1; }

int pp_genome_output_arity(const pp_genome* genome) { return genome ? genome->genome.output_arity : -1; }

pp_status pp_genome_activate(const pp_genome* genome, const double* inputs, size_t input_count,
                             double* outputs, size_t output_count) {
  return guarded([&] {
    require(genome && (inputs || input_count == 0) && outputs, "genome, inputs and outputs are required");
    if (output_count != static_cast<size_t>(genome->genome.output_arity)) {
      throw predprey::Error(predprey::ErrorCode::kArity,
                            "expected " + std::to_string(genome->genome.output_arity) + " outputs");
    }
    genome->network.activate(std::span<const double>(inputs, input_count), std::span<double>(outputs, output_count));
  });
}

pp_status pp_episode_run(const pp_genome* const predators[3], const pp_genome* prey, const char* config_path,
                         uint64_t seed, pp_episode** out) {
  return guarded([&] {
    require(predators && predators[0] && predators[1] && predators[2] && prey && out,
            "three predators, a prey and out are required");
    const predprey::RunConfig config = resolve_config(config_path, nullptr);
    const std::array<const predprey::neat::Genome*, predprey::kPredatorCount> team{
        &predators[0]->genome, &predators[1]->genome, &predators[2]->genome};
    *out = new pp_episode{predprey::run_episode(team, prey->genome, config.env.arena, config.env.camera, seed)};
  });
}

void pp_episode_free(pp_episode* episode) { delete episode; }

int pp_episode_caught(const pp_episode* episode) { return episode && episode->outcome.caught ? 1 : 0; }

double pp_episode_time(const pp_episode* episode) { return episode ? episode->outcome.t : 0.0; }

int pp_episode_catcher(const pp_episode* episode) { return episode ? episode->outcome.catcher : -1; }

double pp_episode_final_distance(const pp_episode* episode, int predator) {
  if (!episode || predator < 0 || predator >= predprey::kPredatorCount) return -1.0;
  return episode->outcome.final_distances[predator];
}

size_t pp_episode_frame_count(const pp_episode* episode) {
  return episode ? episode->outcome.trajectory.size() : 0;
}

pp_status pp_episode_write_trajectory(const pp_episode* episode, const char* path) {
  return guarded([&] {
    require(episode && path, "episode and path are required");
    predprey::write_trajectory_file(path, episode->outcome.trajectory);
  });
}

pp_status pp_config_describe(const char* config_path, const char* profile, char* text, size_t capacity,
                             size_t* length, char hash[17]) {
  return guarded([&] {
    const predprey::RunConfig config = resolve_config(config_path, profile);
    copy_text(predprey::emit_run_config(config), text, capacity, length);
    if (hash) copy_text(predprey::config_hash(config), hash, 17, nullptr);
  });
}

void pp_evolve_options_init(pp_evolve_options* options) {
  if (options) *options = pp_evolve_options{};
}

pp_status pp_evolve(const pp_evolve_options* options, pp_evolve_result* result) {
  return guarded([&] {
    require(options != nullptr, "options are required");
    predprey::RunConfig config = resolve_config(options->config_path, options->profile);
    if (options->output_dir && *options->output_dir) config.output_dir = options->output_dir;
    if (options->has_seed) config.env.coevo.master_seed = options->seed;
    require(options->threads >= 0 && options->stop_after >= 0, "threads and stop_after must be >= 0");
    if (options->threads > 0) config.threads = static_cast<unsigned>(options->threads);
    config.env.coevo.threads = config.threads;
    predprey::EvolveOptions evolve;
    evolve.resume = options->resume != 0;
    if (options->stop_after > 0) evolve.stop_after = options->stop_after;
    if (options->progress) {
      evolve.progress = [options](int done, int target) { options->progress(done, target, options->user); };
    }
    predprey::clear_stop_request();
    const predprey::EvolveResult r = predprey::evolve_run(config, evolve);
    if (result) {
      result->generations_completed = r.generations_completed;
      result->complete = r.complete ? 1 : 0;
      result->interrupted = r.interrupted ? 1 : 0;
    }
  });
}

void pp_request_stop(void) { predprey::request_stop(); }

pp_status pp_tournament(const char* run_dir, int episodes, uint64_t seed, int threads, const char* out_dir,
                        int* generations) {
  return guarded([&] {
    require(run_dir && out_dir, "run_dir and out_dir are required");
    require(threads >= 0, "threads must be >= 0");
    const auto matrix = predprey::master_tournament(run_dir, episodes, seed, threads > 0 ? threads : 1);
    predprey::write_tournament(out_dir, matrix, predprey::accumulated_scores(matrix, matrix.episode_time));
    if (generations) *generations = matrix.predator_generations;
  });
}

pp_status pp_export_trajectories(const char* run_dir, int predator_generation, int prey_generation, int episodes,
                                 uint64_t seed, const char* out_dir) {
  return guarded([&] {
    require(run_dir && out_dir, "run_dir and out_dir are required");
    predprey::export_trajectories(predator_generation, prey_generation, run_dir, episodes, seed, out_dir);
  });
}

pp_status pp_replay(const char* trajectory_path, const char* config_path, char* summary, size_t capacity,
                    size_t* length) {
  return guarded([&] {
    require(trajectory_path != nullptr, "trajectory path is required");
    const predprey::RunConfig config = resolve_config(config_path, nullptr);
    copy_text(predprey::replay_trajectory(trajectory_path, config.env.arena).summary, summary, capacity, length);
  });
}

void pp_serve_options_init(pp_serve_options* options) {
  if (options) *options = pp_serve_options{};
}

pp_status pp_serve(const pp_serve_options* options) {
  return guarded([&] {
    require(options && options->run_dir, "run_dir is required");
    require(options->tick_ms >= 0, "tick_ms must be >= 0");
    predprey::live::ServeOptions serve;
    serve.run_dir = options->run_dir;
    serve.generation = options->generation;
    if (options->bind_address) serve.bind_address = options->bind_address;
    serve.port = options->port;
    if (options->tick_ms > 0) serve.tick_interval = std::chrono::milliseconds(options->tick_ms);
    serve.lockstep = options->lockstep != 0;
    if (options->static_dir) serve.static_dir = options->static_dir;
    if (options->session_log) serve.session_log = options->session_log;
    serve.handle_signals = true;
    predprey::live::LiveServer server(serve);
    if (options->ready) options->ready(server.port(), options->user);
    server.run();
  });
}

}  // extern "C"
