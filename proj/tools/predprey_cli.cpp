#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "predprey/predprey.h"

namespace {

volatile std::sig_atomic_t g_signalled = 0;

void on_sigint(int) {
  g_signalled = 1;
  pp_request_stop();
  std::signal(SIGINT, SIG_DFL);
}

int fail(pp_status status) {
  std::string message = pp_last_error();
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "%s: %s\n", pp_status_name(status), message.c_str());
  return static_cast<int>(status);
}

// Parallelism: --threads beats PREDPREY_THREADS beats the config file.
int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("PREDPREY_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::fprintf(stderr, "warning: ignoring PREDPREY_THREADS=%s\n", env);
  }
  return 0;
}

void print_progress(int done, int target, void*) { std::fprintf(stderr, "generation %d/%d done\n", done, target); }

void print_ready(unsigned short port, void*) {
  std::fprintf(stderr, "serving on port %u (Ctrl-C to stop)\n", port);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predator-prey coevolution arena"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pp_version());

  std::string config_path;
  std::string profile = "default";
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool resume = false;
  bool quiet = false;
  int stop_after = 0;

  auto* evolve = app.add_subcommand("evolve", "Run (or resume) a coevolution");
  evolve->add_option("-c,--config", config_path, "Config file");
  evolve->add_option("--profile", profile, "Built-in profile when no config file is given")
      ->check(CLI::IsMember({"default", "smoke"}));
  auto* seed_opt = evolve->add_option("-s,--seed", seed, "Override the master seed");
  evolve->add_option("-o,--out", out_dir, "Run directory (overrides the config)");
  evolve->add_option("-j,--threads", threads, "Worker threads (env PREDPREY_THREADS)")->check(CLI::PositiveNumber);
  evolve->add_flag("--resume", resume, "Continue from the run directory's checkpoint");
  evolve->add_option("--stop-after", stop_after, "Stop after this many generations")->check(CLI::PositiveNumber);
  evolve->add_flag("-q,--quiet", quiet, "No progress output");

  std::string run_dir;
  int episodes = 3;
  std::uint64_t tseed = 1;
  auto* tournament = app.add_subcommand("tournament", "Master tournament over a run's best genomes");
  tournament->add_option("run_dir", run_dir, "Run directory")->required();
  tournament->add_option("-E,--episodes", episodes, "Episodes per cell")->check(CLI::PositiveNumber);
  tournament->add_option("-s,--seed", tseed, "Tournament seed");
  tournament->add_option("-o,--out", out_dir, "Output directory (default <run_dir>/tournament)");
  tournament->add_option("-j,--threads", threads, "Worker threads (env PREDPREY_THREADS)")->check(CLI::PositiveNumber);

  int predator_gen = 0;
  int prey_gen = 0;
  int export_episodes = 1;
  auto* exporter = app.add_subcommand("export", "Export episode trajectories for one pairing");
  exporter->add_option("run_dir", run_dir, "Run directory")->required();
  exporter->add_option("-p,--predator-gen", predator_gen, "Predator generation")->required();
  exporter->add_option("-y,--prey-gen", prey_gen, "Prey generation")->required();
  exporter->add_option("-E,--episodes", export_episodes, "Episodes")->check(CLI::PositiveNumber);
  exporter->add_option("-s,--seed", tseed, "Tournament seed");
  exporter->add_option("-o,--out", out_dir, "Output directory")->required();

  std::string trajectory;
  auto* replay = app.add_subcommand("replay", "Validate a trajectory file and summarize it");
  replay->add_option("trajectory", trajectory, "Trajectory CSV")->required();
  replay->add_option("-c,--config", config_path, "Config with the arena used for the episode");

  int generation = 0;
  unsigned short port = 8080;
  std::string bind = "127.0.0.1";
  int tick_ms = 100;
  std::string static_dir;
  std::string session_log;
  bool lockstep = false;
  auto* serve = app.add_subcommand("serve", "Live play against one generation");
  serve->add_option("run_dir", run_dir, "Run directory")->required();
  serve->add_option("-g,--generation", generation, "Generation to load")->required();
  serve->add_option("-p,--port", port, "TCP port (0 picks one)");
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--tick-ms", tick_ms, "Wall-clock milliseconds per tick")->check(CLI::PositiveNumber);
  serve->add_option("--static", static_dir, "Directory of browser client assets");
  serve->add_option("--session-log", session_log, "Trial log (default <run_dir>/sessions.jsonl)");
  serve->add_flag("--lockstep", lockstep, "Advance one tick per control message");

  auto* config = app.add_subcommand("config", "Print a canonical config and its hash");
  config->add_option("-c,--config", config_path, "Config file");
  config->add_option("--profile", profile, "Built-in profile")->check(CLI::IsMember({"default", "smoke"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    for (char& c : message) {
      if (c == '\n') c = ' ';
    }
    std::fprintf(stderr, "%s: %s\n", pp_status_name(PP_E_ARGUMENT), message.c_str());
    return PP_E_ARGUMENT;
  }

  if (*evolve) {
    pp_evolve_options opts;
    pp_evolve_options_init(&opts);
    opts.config_path = config_path.empty() ? nullptr : config_path.c_str();
    opts.profile = profile.c_str();
    opts.output_dir = out_dir.empty() ? nullptr : out_dir.c_str();
    opts.has_seed = seed_opt->count() > 0;
    opts.seed = seed;
    opts.threads = resolve_threads(threads);
    opts.resume = resume;
    opts.stop_after = stop_after;
    if (!quiet) opts.progress = print_progress;
    std::signal(SIGINT, on_sigint);
    pp_evolve_result result{};
    const pp_status status = pp_evolve(&opts, &result);
    std::signal(SIGINT, SIG_DFL);
    if (status != PP_OK) return fail(status);
    if (result.interrupted) {
      std::fprintf(stderr, "stopped after %d generations; continue with --resume\n", result.generations_completed);
      return g_signalled ? 130 : 0;
    }
    if (!quiet) std::fprintf(stderr, "complete: %d generations\n", result.generations_completed);
    return 0;
  }

  if (*tournament) {
    const std::string out = out_dir.empty() ? run_dir + "/tournament" : out_dir;
    const int t = resolve_threads(threads);
    int generations = 0;
    const pp_status status = pp_tournament(run_dir.c_str(), episodes, tseed, t > 0 ? t : 1, out.c_str(), &generations);
    if (status != PP_OK) return fail(status);
    std::printf("%dx%d matrix written to %s\n", generations, generations, out.c_str());
    return 0;
  }

  if (*exporter) {
    const pp_status status =
        pp_export_trajectories(run_dir.c_str(), predator_gen, prey_gen, export_episodes, tseed, out_dir.c_str());
    if (status != PP_OK) return fail(status);
    std::printf("%d trajectories written to %s\n", export_episodes, out_dir.c_str());
    return 0;
  }

  if (*replay) {
    char summary[256];
    const pp_status status = pp_replay(trajectory.c_str(), config_path.empty() ? nullptr : config_path.c_str(),
                                       summary, sizeof summary, nullptr);
    if (status != PP_OK) return fail(status);
    std::printf("%s\n", summary);
    return 0;
  }

  if (*serve) {
    pp_serve_options opts;
    pp_serve_options_init(&opts);
    opts.run_dir = run_dir.c_str();
    opts.generation = generation;
    opts.bind_address = bind.c_str();
    opts.port = port;
    opts.tick_ms = tick_ms;
    opts.lockstep = lockstep;
    opts.static_dir = static_dir.empty() ? nullptr : static_dir.c_str();
    opts.session_log = session_log.empty() ? nullptr : session_log.c_str();
    opts.ready = print_ready;
    const pp_status status = pp_serve(&opts);
    if (status != PP_OK) return fail(status);
    return 0;
  }

  if (*config) {
    size_t length = 0;
    char hash[17];
    pp_status status = pp_config_describe(config_path.empty() ? nullptr : config_path.c_str(), profile.c_str(),
                                          nullptr, 0, &length, hash);
    if (status != PP_OK) return fail(status);
    std::string text(length + 1, '\0');
    status = pp_config_describe(config_path.empty() ? nullptr : config_path.c_str(), profile.c_str(), text.data(),
                                text.size(), nullptr, hash);
    if (status != PP_OK) return fail(status);
    text.resize(length);
    std::printf("%s# hash %s\n", text.c_str(), hash);
    return 0;
  }
  return 0;
}
