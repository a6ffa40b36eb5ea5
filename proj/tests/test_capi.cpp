// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <string>
#include <thread>

#include "predprey/predprey.h"
#include "temp_dir.hpp"

namespace {

// 3 -> 2 genome steering toward the camera bearing with forward bias.
const char* kChaser = R"({
  "input_arity": 3, "output_arity": 2,
  "nodes": [
    {"id": 0, "role": "input", "bias": 0.0}, {"id": 1, "role": "input", "bias": 0.0},
    {"id": 2, "role": "input", "bias": 0.0},
    {"id": 3, "role": "output", "bias": 0.35}, {"id": 4, "role": "output", "bias": 0.35}],
  "connections": [
    {"innovation": 0, "from": 0, "to": 3, "weight": 2.0, "enabled": true},
    {"innovation": 1, "from": 0, "to": 4, "weight": -2.0, "enabled": true}]
})";

std::string idle_prey() {
  std::string nodes;
  for (int i = 0; i < 8; ++i) nodes += R"({"id": )" + std::to_string(i) + R"(, "role": "input", "bias": 0.0},)";
  return R"({"input_arity": 8, "output_arity": 2, "nodes": [)" + nodes +
         R"({"id": 8, "role": "output", "bias": 0.0}, {"id": 9, "role": "output", "bias": 0.0}], "connections": []})";
}

}  // namespace

TEST_CASE("status names") {
  CHECK(std::string(pp_status_name(PP_OK)) == "OK");
  CHECK(std::string(pp_status_name(PP_E_CONFIG)) == "E_CONFIG");
  CHECK(std::string(pp_status_name(PP_E_RESUME_MISMATCH)) == "E_RESUME_MISMATCH");
  CHECK(std::string(pp_status_name(PP_E_PORT_IN_USE)) == "E_PORT_IN_USE");
  CHECK(std::string(pp_status_name(PP_E_INTERNAL)) == "E_INTERNAL");
  CHECK(std::string(pp_status_name(static_cast<pp_status>(99))) == "E_UNKNOWN");
  CHECK(std::string(pp_version()) == "0.1.0");
}

TEST_CASE("genome handles") {
  pp_genome* g = nullptr;
  REQUIRE(pp_genome_parse(kChaser, &g) == PP_OK);
  CHECK(pp_genome_input_arity(g) == 3);
  CHECK(pp_genome_output_arity(g) == 2);
  const double in[3] = {0.5, 0.2, -1.0};
  double out[2] = {0, 0};
  REQUIRE(pp_genome_activate(g, in, 3, out, 2) == PP_OK);
  CHECK(out[0] == doctest::Approx(std::tanh(0.35 + 1.0)).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(std::tanh(0.35 - 1.0)).epsilon(1e-12));
  CHECK(pp_genome_activate(g, in, 2, out, 2) == PP_E_ARITY);
  CHECK(pp_genome_activate(g, in, 3, out, 1) == PP_E_ARITY);
  pp_genome_free(g);

  pp_genome* bad = nullptr;
  CHECK(pp_genome_parse("{", &bad) == PP_E_MALFORMED);
  CHECK(bad == nullptr);
  CHECK(std::string(pp_last_error()).size() > 0);
  CHECK(pp_genome_load("/nonexistent/genome.json", &bad) == PP_E_INVENTORY);
  CHECK(std::string(pp_last_error()).find("/nonexistent/genome.json") != std::string::npos);
  CHECK(pp_genome_parse(nullptr, &bad) == PP_E_ARGUMENT);
  pp_genome_free(nullptr);
}

TEST_CASE("last error is per thread") {
  pp_genome* g = nullptr;
  CHECK(pp_genome_load("/nonexistent/a.json", &g) == PP_E_INVENTORY);
  std::string other;
  std::thread([&] { other = pp_last_error(); }).join();
  CHECK(other.empty());
  CHECK_FALSE(std::string(pp_last_error()).empty());
}

TEST_CASE("episodes through the C API") {
  TempDir tmp;
  pp_genome* chaser = nullptr;
  pp_genome* prey = nullptr;
  REQUIRE(pp_genome_parse(kChaser, &chaser) == PP_OK);
  REQUIRE(pp_genome_parse(idle_prey().c_str(), &prey) == PP_OK);
  const pp_genome* team[3] = {chaser, chaser, chaser};
  pp_episode* ep = nullptr;
  REQUIRE(pp_episode_run(team, prey, nullptr, 4, &ep) == PP_OK);
  CHECK(pp_episode_caught(ep) == 1);
  CHECK(pp_episode_time(ep) > 0.0);
  CHECK(pp_episode_time(ep) < 30.0);
  CHECK(pp_episode_catcher(ep) == 1);
  CHECK(pp_episode_final_distance(ep, 1) <= 0.3);
  CHECK(pp_episode_final_distance(ep, 3) == -1.0);
  CHECK(pp_episode_frame_count(ep) == static_cast<size_t>(std::lround(pp_episode_time(ep) / 0.1)) + 1);
  const std::string path = tmp / "ep.csv";
  REQUIRE(pp_episode_write_trajectory(ep, path.c_str()) == PP_OK);

  char summary[128];
  size_t length = 0;
  REQUIRE(pp_replay(path.c_str(), nullptr, summary, sizeof summary, &length) == PP_OK);
  CHECK(std::string(summary).rfind("valid, caught at t=", 0) == 0);
  CHECK(length == std::string(summary).size());

  const pp_genome* wrong[3] = {chaser, prey, chaser};
  pp_episode* none = nullptr;
  CHECK(pp_episode_run(wrong, prey, nullptr, 4, &none) == PP_E_ARITY);
  CHECK(std::string(pp_last_error()).find("predator 1") != std::string::npos);
  CHECK(pp_episode_run(team, chaser, nullptr, 4, &none) == PP_E_ARITY);
  CHECK(none == nullptr);

  pp_episode_free(ep);
  pp_genome_free(chaser);
  pp_genome_free(prey);
}

TEST_CASE("config description and text truncation") {
  char hash[17];
  size_t length = 0;
  REQUIRE(pp_config_describe(nullptr, "smoke", nullptr, 0, &length, hash) == PP_OK);
  CHECK(std::string(hash).size() == 16);
  char small[8];
  REQUIRE(pp_config_describe(nullptr, "smoke", small, sizeof small, nullptr, nullptr) == PP_OK);
  CHECK(std::string(small) == "# predp");
  std::string full(length + 1, '\0');
  REQUIRE(pp_config_describe(nullptr, "smoke", full.data(), full.size(), nullptr, nullptr) == PP_OK);
  CHECK(full.find("population_size = 8\n") != std::string::npos);
  CHECK(pp_config_describe(nullptr, "huge", nullptr, 0, nullptr, nullptr) == PP_E_ARGUMENT);
  CHECK(pp_config_describe("/nonexistent.ini", nullptr, nullptr, 0, nullptr, nullptr) == PP_E_CONFIG);
}

TEST_CASE("evolve, tournament, export and replay") {
  TempDir tmp;
  const std::string cfg = tmp / "tiny.ini";
  spit(cfg,
       "[neat]\npopulation_size = 4\ngenerations = 3\nelites = 1\n"
       "[coevo]\nevaluations = 1\nmaster_seed = 3\n");

  pp_evolve_options opts;
  pp_evolve_options_init(&opts);
  opts.config_path = cfg.c_str();
  const std::string run = tmp / "run";
  opts.output_dir = run.c_str();
  opts.stop_after = 1;
  int calls = 0;
  opts.progress = [](int, int, void* user) { ++*static_cast<int*>(user); };
  opts.user = &calls;
  pp_evolve_result result{};
  REQUIRE(pp_evolve(&opts, &result) == PP_OK);
  CHECK(result.interrupted == 1);
  CHECK(result.generations_completed == 1);
  CHECK(calls == 1);

  CHECK(pp_evolve(&opts, &result) == PP_E_ARGUMENT);
  opts.resume = 1;
  opts.stop_after = 0;
  opts.has_seed = 1;
  opts.seed = 4;
  CHECK(pp_evolve(&opts, &result) == PP_E_RESUME_MISMATCH);
  opts.has_seed = 0;
  REQUIRE(pp_evolve(&opts, &result) == PP_OK);
  CHECK(result.complete == 1);
  CHECK(result.generations_completed == 3);

  int generations = 0;
  const std::string out = tmp / "tour";
  REQUIRE(pp_tournament(run.c_str(), 1, 5, 2, out.c_str(), &generations) == PP_OK);
  CHECK(generations == 3);
  CHECK(std::filesystem::exists(tmp.path() / "tour" / "matrix.csv"));
  CHECK(std::filesystem::exists(tmp.path() / "tour" / "scores.csv"));
  CHECK(std::filesystem::exists(tmp.path() / "tour" / "summary.txt"));
  CHECK(pp_tournament((tmp / "none").c_str(), 1, 5, 1, out.c_str(), nullptr) == PP_E_INVENTORY);

  const std::string ex = tmp / "ex";
  REQUIRE(pp_export_trajectories(run.c_str(), 2, 0, 2, 5, ex.c_str()) == PP_OK);
  char summary[128];
  REQUIRE(pp_replay((ex + "/episode_001.csv").c_str(), cfg.c_str(), summary, sizeof summary, nullptr) == PP_OK);
  CHECK(std::string(summary).rfind("valid, ", 0) == 0);
  CHECK(pp_export_trajectories(run.c_str(), 9, 0, 1, 5, ex.c_str()) == PP_E_INVENTORY);
  CHECK(std::string(pp_last_error()).find("generation 9") != std::string::npos);
}

TEST_CASE("serve reports errors before blocking") {
  pp_serve_options opts;
  pp_serve_options_init(&opts);
  CHECK(pp_serve(&opts) == PP_E_ARGUMENT);
  opts.run_dir = "/nonexistent/run";
  CHECK(pp_serve(&opts) == PP_E_INVENTORY);
}
