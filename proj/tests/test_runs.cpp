#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "common/error.hpp"
#include "json.hpp"
#include "runs/config.hpp"
#include "runs/evolve.hpp"
#include "runs/layout.hpp"
#include "runs/replay.hpp"
#include "temp_dir.hpp"
#include "tournament/tournament.hpp"

using namespace predprey;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config(const std::string& dir, int generations = 2) {
  RunConfig c = default_run_config();
  c.env.neat.generations = generations;
  c.env.neat.population_size = 4;
  c.env.neat.elites = 1;
  c.env.coevo.evaluations = 1;
  c.env.coevo.master_seed = 7;
  c.output_dir = dir;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Run artifacts that must match byte for byte; timing.jsonl holds wall-clock
// durations and is excluded.
std::map<std::string, std::string> deterministic_files(const fs::path& root) {
  auto files = tree_contents(root);
  files.erase("timing.jsonl");
  return files;
}

}  // namespace

TEST_CASE("default config matches the published parameters") {
  const RunConfig c = default_run_config();
  CHECK(c.env.neat.population_size == 20);
  CHECK(c.env.neat.generations == 100);
  CHECK(c.env.neat.weight_mutate_rate == 0.8);
  CHECK(c.env.neat.bias_mutate_rate == 0.7);
  CHECK(c.env.neat.p_add_connection == 0.1);
  CHECK(c.env.neat.p_delete_connection == 0.1);
  CHECK(c.env.neat.p_add_node == 0.1);
  CHECK(c.env.neat.p_delete_node == 0.1);
  CHECK(c.env.neat.elites == 4);
  CHECK(c.env.coevo.hof_window == 10);
  CHECK_NOTHROW(c.validate());

  const RunConfig s = smoke_run_config();
  CHECK(s.env.neat.generations == 10);
  CHECK(s.env.neat.population_size == 8);
  CHECK(s.env.coevo.evaluations == 3);
}

TEST_CASE("config round trip is hash-equal") {
  RunConfig c = default_run_config();
  c.env.arena.dt = 0.1;
  c.env.camera.fov = 1.2345678901234567;
  c.env.coevo.master_seed = 18446744073709551615ULL;
  const std::string text = emit_run_config(c);
  const RunConfig back = parse_run_config(text);
  CHECK(emit_run_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.env.camera.fov == c.env.camera.fov);
  CHECK(back.env.coevo.master_seed == c.env.coevo.master_seed);
}

TEST_CASE("empty config text yields the defaults") {
  CHECK(config_hash(parse_run_config("")) == config_hash(default_run_config()));
}

TEST_CASE("config hash ignores the run section only") {
  RunConfig a = default_run_config();
  RunConfig b = a;
  b.output_dir = "elsewhere";
  b.threads = 8;
  CHECK(config_hash(a) == config_hash(b));
  b.env.neat.population_size = 21;
  CHECK(config_hash(a) != config_hash(b));
  RunConfig c = a;
  c.env.coevo.master_seed = 2;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("config parse errors carry line numbers") {
  const auto msg = [](const std::string& text) { return message_of([&] { parse_run_config(text, "cfg"); }); };
  CHECK(msg("[neat]\npopulation_size = 10\nbogus = 1\n").find("cfg:3: unknown key 'bogus'") != std::string::npos);
  CHECK(msg("# c\n[nope]\n").find("cfg:2: unknown section") != std::string::npos);
  CHECK(msg("[neat]\npopulation_size = ten\n").find("cfg:2: invalid value 'ten'") != std::string::npos);
  CHECK(msg("[neat]\npopulation_size = 10.5\n").find("cfg:2:") != std::string::npos);
  CHECK(msg("population_size = 10\n").find("cfg:1: key 'population_size' outside") != std::string::npos);
  CHECK(msg("[neat]\njust words\n").find("cfg:2: expected") != std::string::npos);
  CHECK(msg("[neat]\nelites = 1\nelites = 2\n").find("cfg:3: duplicate key") != std::string::npos);
  CHECK(msg("[arena\n").find("cfg:1: unterminated") != std::string::npos);
  CHECK(code_of([] { parse_run_config("[neat]\npopulation_size = 1\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_run_config("[coevo]\nhof_window = 0\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { load_run_config("/nonexistent/predprey.ini"); }) == ErrorCode::kConfig);
}

TEST_CASE("comments and whitespace are tolerated") {
  const RunConfig c = parse_run_config("; top\n  [coevo]  \n\tmaster_seed=99   \n# end\n");
  CHECK(c.env.coevo.master_seed == 99);
}

TEST_CASE("evolve writes the run layout") {
  TempDir tmp;
  const RunConfig c = tiny_config(tmp / "run");
  const EvolveResult r = evolve_run(c);
  CHECK(r.complete);
  CHECK(r.generations_completed == 2);
  const RunLayout layout{tmp / "run"};
  for (Role role : kRoleCycle) {
    for (int g = 0; g < 2; ++g) CHECK(fs::exists(layout.hof_genome(role, g)));
    CHECK_FALSE(fs::exists(layout.hof_genome(role, 2)));
  }
  CHECK(inventory_generations(layout) == 2);
  CHECK_FALSE(fs::exists(layout.lock()));
  const Manifest m = read_manifest(layout);
  CHECK(m.complete);
  CHECK(m.generations_completed == 2);
  CHECK(m.config_hash == config_hash(c));
  CHECK(config_hash(load_run_dir_config(layout)) == config_hash(c));

  std::istringstream log(slurp(layout.generation_log()));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto doc = nlohmann::json::parse(line);
    CHECK(doc.at("generation").get<int>() == lines / 4);
    CHECK(doc.at("role").get<std::string>() == role_name(kRoleCycle[lines % 4]));
    CHECK(doc.at("episodes").get<int>() == 4);
    CHECK_FALSE(doc.contains("wall_seconds"));
    ++lines;
  }
  CHECK(lines == 8);
  CHECK(code_of([&] { load_hof_genome(layout, Role::kPredator1, 5); }) == ErrorCode::kInventory);
  CHECK(message_of([&] { load_hof_genome(layout, Role::kPredator1, 5); }).find("generation 5 role pred1") !=
        std::string::npos);
}

TEST_CASE("same seed evolutions are byte-identical, across thread counts") {
  TempDir tmp;
  RunConfig a = tiny_config(tmp / "a", 3);
  RunConfig b = tiny_config(tmp / "b", 3);
  b.threads = 3;
  evolve_run(a);
  evolve_run(b);
  CHECK(deterministic_files(tmp.path() / "a") == deterministic_files(tmp.path() / "b"));
  RunConfig c = tiny_config(tmp / "c", 3);
  c.env.coevo.master_seed = 8;
  evolve_run(c);
  CHECK(slurp(tmp.path() / "a" / "generation_log.jsonl") != slurp(tmp.path() / "c" / "generation_log.jsonl"));
}

TEST_CASE("interrupt and resume matches an uninterrupted run") {
  TempDir tmp;
  evolve_run(tiny_config(tmp / "straight", 4));
  for (int first : {1, 2, 3}) {
    const std::string dir = tmp / ("split" + std::to_string(first));
    EvolveOptions stop;
    stop.stop_after = first;
    const EvolveResult part = evolve_run(tiny_config(dir, 4), stop);
    CHECK(part.interrupted);
    CHECK_FALSE(part.complete);
    CHECK(part.generations_completed == first);
    CHECK_FALSE(read_manifest(RunLayout{dir}).complete);
    EvolveOptions resume;
    resume.resume = true;
    const EvolveResult rest = evolve_run(tiny_config(dir, 4), resume);
    CHECK(rest.complete);
    CHECK(deterministic_files(tmp.path() / "straight") == deterministic_files(dir));
  }
}

TEST_CASE("resume discards work past the checkpoint") {
  TempDir tmp;
  evolve_run(tiny_config(tmp / "straight", 3));
  const std::string dir = tmp / "crashed";
  EvolveOptions stop;
  stop.stop_after = 1;
  evolve_run(tiny_config(dir, 3), stop);
  // Simulate a crash mid-round: a stray log line and a genome file from the
  // unfinished generation.
  const RunLayout layout{dir};
  std::ofstream(layout.generation_log(), std::ios::app)
      << R"({"generation":1,"role":"prey","best_fitness":0.5,"mean_fitness":0.5,"episodes":4})" << "\n{\"gener";
  fs::copy_file(layout.hof_genome(Role::kPrey, 0), layout.hof_genome(Role::kPrey, 1));
  EvolveOptions resume;
  resume.resume = true;
  evolve_run(tiny_config(dir, 3), resume);
  CHECK(deterministic_files(tmp.path() / "straight") == deterministic_files(dir));
}

TEST_CASE("evolve refusals") {
  TempDir tmp;
  const std::string dir = tmp / "run";
  EvolveOptions stop;
  stop.stop_after = 1;
  evolve_run(tiny_config(dir, 3), stop);

  CHECK(code_of([&] { evolve_run(tiny_config(dir, 3)); }) == ErrorCode::kArgument);

  EvolveOptions resume;
  resume.resume = true;
  RunConfig changed = tiny_config(dir, 3);
  changed.env.coevo.master_seed = 99;
  CHECK(code_of([&] { evolve_run(changed, resume); }) == ErrorCode::kResumeMismatch);
  CHECK(code_of([&] { evolve_run(tiny_config(tmp / "fresh", 3), resume); }) == ErrorCode::kResumeMismatch);

  {
    RunLock held(RunLayout{dir}.lock());
    CHECK(code_of([&] { evolve_run(tiny_config(dir, 3), resume); }) == ErrorCode::kLocked);
  }
  // Changing only the run section is allowed on resume.
  RunConfig threaded = tiny_config(dir, 3);
  threaded.threads = 2;
  CHECK(evolve_run(threaded, resume).complete);
}

TEST_CASE("stop request halts at a generation boundary") {
  TempDir tmp;
  request_stop();
  const EvolveResult r = evolve_run(tiny_config(tmp / "run", 2));
  clear_stop_request();
  CHECK(r.interrupted);
  CHECK(r.generations_completed == 0);
  CHECK(fs::exists(RunLayout{tmp / "run"}.manifest()));
  EvolveOptions resume;
  resume.resume = true;
  CHECK(evolve_run(tiny_config(tmp / "run", 2), resume).complete);
}

TEST_CASE("replay validates exported trajectories against the index") {
  TempDir tmp;
  evolve_run(tiny_config(tmp / "run", 2));
  const auto rows = export_trajectories(1, 0, tmp / "run", 4, 11, tmp / "export");
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    const ReplayReport rep = replay_trajectory(tmp / ("export/" + row.file));
    CHECK(rep.caught == row.caught);
    CHECK(rep.t == doctest::Approx(row.t).epsilon(1e-12));
    if (row.caught) {
      CHECK(rep.summary.rfind("valid, caught at t=", 0) == 0);
      CHECK(rep.catcher == row.catcher);
    } else {
      CHECK(rep.summary == "valid, not caught (t=30.000)");
    }
  }
}

namespace {

std::string frame_line(int tick, double prey_x) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d,%.6f,2.000000,0.000000,1.000000,0.300000,1.570796,2.000000,0.300000,1.570796,3.000000,0.300000,1.570796",
                tick, prey_x);
  return buf;
}

std::string uncaught_file(int ticks) {
  std::string text = trajectory_header() + "\n";
  for (int t = 0; t <= ticks; ++t) text += frame_line(t, 2.0) + "\n";
  return text;
}

}  // namespace

TEST_CASE("replay reports violations with the offending tick") {
  TempDir tmp;
  const std::string path = tmp / "t.csv";

  spit(path, uncaught_file(300));
  CHECK(replay_trajectory(path).summary == "valid, not caught (t=30.000)");

  std::string text = uncaught_file(300);
  const std::string good = frame_line(57, 2.0);
  text.replace(text.find(good), good.size(), frame_line(57, 3.95));
  spit(path, text);
  CHECK(code_of([&] { replay_trajectory(path); }) == ErrorCode::kInvariant);
  const std::string msg = message_of([&] { replay_trajectory(path); });
  CHECK(msg.find("tick 57") != std::string::npos);
  CHECK(msg.find("containment") != std::string::npos);

  spit(path, uncaught_file(120));
  CHECK(message_of([&] { replay_trajectory(path); }).find("without a catch") != std::string::npos);

  spit(path, uncaught_file(301));
  CHECK(code_of([&] { replay_trajectory(path); }) == ErrorCode::kInvariant);

  // Prey sitting on predator 1 at tick 3 while the file continues.
  std::string caught = trajectory_header() + "\n";
  for (int t = 0; t <= 5; ++t) {
    caught += (t == 3 ? "3,2.000000,0.550000,0.000000,1.000000,0.300000,1.570796,2.000000,0.300000,1.570796,3.000000,0.300000,1.570796"
                      : frame_line(t, 2.0)) + "\n";
  }
  spit(path, caught);
  CHECK(message_of([&] { replay_trajectory(path); }).find("tick 3: prey is caught but the trajectory continues") !=
        std::string::npos);
}

TEST_CASE("replay format errors are malformed-file errors with line numbers") {
  TempDir tmp;
  const std::string path = tmp / "t.csv";
  spit(path, "");
  CHECK(code_of([&] { replay_trajectory(path); }) == ErrorCode::kMalformed);
  CHECK(message_of([&] { replay_trajectory(path); }).find("empty file") != std::string::npos);

  spit(path, "tick,x\n");
  CHECK(message_of([&] { replay_trajectory(path); }).find(":1: expected header") != std::string::npos);

  spit(path, trajectory_header() + "\n");
  CHECK(code_of([&] { replay_trajectory(path); }) == ErrorCode::kMalformed);

  std::string text = uncaught_file(10);
  text.replace(text.find(frame_line(4, 2.0)), frame_line(4, 2.0).size(), "4,0.0,oops");
  spit(path, text);
  CHECK(message_of([&] { replay_trajectory(path); }).find(":6: expected 13 fields") != std::string::npos);

  text = uncaught_file(10);
  text.replace(text.find(frame_line(4, 2.0)), 1, "x");
  spit(path, text);
  CHECK(message_of([&] { replay_trajectory(path); }).find(":6: bad tick") != std::string::npos);

  text = uncaught_file(10);
  text.replace(text.find(frame_line(4, 2.0)), 1, "5");
  spit(path, text);
  CHECK(message_of([&] { replay_trajectory(path); }).find(":6: tick 5 where 4") != std::string::npos);

  CHECK(code_of([&] { replay_trajectory(tmp / "missing.csv"); }) == ErrorCode::kIo);
}

TEST_CASE("replay cross-checks index.csv") {
  TempDir tmp;
  spit(tmp / "episode_000.csv", uncaught_file(300));
  spit(tmp / "index.csv", "episode,file,seed,caught,t,catcher,d0,d1,d2\n0,episode_000.csv,1,1,4.2,0,0,0,0\n");
  CHECK(code_of([&] { replay_trajectory(tmp / "episode_000.csv"); }) == ErrorCode::kInvariant);
  spit(tmp / "index.csv", "episode,file,seed,caught,t,catcher,d0,d1,d2\n0,episode_000.csv,1,0,30.000000,-1,0,0,0\n");
  CHECK_NOTHROW(replay_trajectory(tmp / "episode_000.csv"));
}
