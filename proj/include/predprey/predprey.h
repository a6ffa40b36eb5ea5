#ifndef PREDPREY_PREDPREY_H
#define PREDPREY_PREDPREY_H

#include <stddef.h>
#include <stdint.h>

#if defined(PREDPREY_BUILDING_LIBRARY)
#define PP_API __attribute__((visibility("default")))
#else
#define PP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; pp_last_error() holds the
 * message of the most recent failure on the calling thread. */
typedef enum pp_status {
  PP_OK = 0,
  PP_E_CONFIG = 1,
  PP_E_RESUME_MISMATCH = 2,
  PP_E_INVENTORY = 3,
  PP_E_IO = 4,
  PP_E_MALFORMED = 5,
  PP_E_INVARIANT = 6,
  PP_E_ARITY = 7,
  PP_E_PORT_IN_USE = 8,
  PP_E_LOCKED = 9,
  PP_E_ARGUMENT = 10,
  PP_E_GENERATION = 11,
  PP_E_TRIAL = 12,
  PP_E_INTERNAL = 13
} pp_status;

PP_API const char* pp_version(void);
/* "OK", "E_CONFIG", ... */
PP_API const char* pp_status_name(pp_status status);
PP_API const char* pp_last_error(void);

/* Functions that return text copy at most `capacity` bytes (always
 * NUL-terminated when capacity > 0) and report the full length, excluding the
 * terminator, through `length` when it is not NULL. */

/* ---- Genomes ---------------------------------------------------------- */

typedef struct pp_genome pp_genome;

PP_API pp_status pp_genome_load(const char* path, pp_genome** out);
PP_API pp_status pp_genome_parse(const char* json_text, pp_genome** out);
PP_API void pp_genome_free(pp_genome* genome);
PP_API int pp_genome_input_arity(const pp_genome* genome);
PP_API int pp_genome_output_arity(const pp_genome* genome);
PP_API pp_status pp_genome_activate(const pp_genome* genome, const double* inputs, size_t input_count,
                                    double* outputs, size_t output_count);

/* ---- Episodes --------------------------------------------------------- */

typedef struct pp_episode pp_episode;

/* Runs one episode. config_path may be NULL for the default arena/camera. */
PP_API pp_status pp_episode_run(const pp_genome* const predators[3], const pp_genome* prey,
                                const char* config_path, uint64_t seed, pp_episode** out);
PP_API void pp_episode_free(pp_episode* episode);
PP_API int pp_episode_caught(const pp_episode* episode);
PP_API double pp_episode_time(const pp_episode* episode);
/* Catching predator index, or -1. */
PP_API int pp_episode_catcher(const pp_episode* episode);
PP_API double pp_episode_final_distance(const pp_episode* episode, int predator);
PP_API size_t pp_episode_frame_count(const pp_episode* episode);
PP_API pp_status pp_episode_write_trajectory(const pp_episode* episode, const char* path);

/* ---- Configuration ---------------------------------------------------- */

/* Canonical text of a config: from config_path when given, else the named
 * built-in profile ("default" or "smoke"). hash receives 17 bytes. */
PP_API pp_status pp_config_describe(const char* config_path, const char* profile, char* text,
                                    size_t capacity, size_t* length, char hash[17]);

/* ---- Evolution -------------------------------------------------------- */

typedef void (*pp_progress_fn)(int generations_done, int generations_target, void* user);

typedef struct pp_evolve_options {
  const char* config_path; /* NULL: use profile */
  const char* profile;     /* "default" (NULL) or "smoke" */
  const char* output_dir;  /* NULL: from config */
  int has_seed;
  uint64_t seed;
  int threads;    /* 0: from config */
  int resume;
  int stop_after; /* 0: run to completion */
  pp_progress_fn progress;
  void* user;
} pp_evolve_options;

typedef struct pp_evolve_result {
  int generations_completed;
  int complete;
  int interrupted;
} pp_evolve_result;

PP_API void pp_evolve_options_init(pp_evolve_options* options);
PP_API pp_status pp_evolve(const pp_evolve_options* options, pp_evolve_result* result);
/* Async-signal-safe: ends a running pp_evolve at the next generation boundary. */
PP_API void pp_request_stop(void);

/* ---- Tournament and exports ------------------------------------------- */

/* Writes matrix.csv, scores.csv and summary.txt into out_dir. */
PP_API pp_status pp_tournament(const char* run_dir, int episodes, uint64_t seed, int threads,
                               const char* out_dir, int* generations);
/* Writes episode_NNN.csv files and index.csv into out_dir. */
PP_API pp_status pp_export_trajectories(const char* run_dir, int predator_generation,
                                        int prey_generation, int episodes, uint64_t seed,
                                        const char* out_dir);
/* Validates a trajectory file; summary receives "valid, ..." on success.
 * config_path may be NULL for the default arena. */
PP_API pp_status pp_replay(const char* trajectory_path, const char* config_path, char* summary,
                           size_t capacity, size_t* length);

/* ---- Live play -------------------------------------------------------- */

typedef void (*pp_ready_fn)(unsigned short port, void* user);

typedef struct pp_serve_options {
  const char* run_dir;
  int generation;
  const char* bind_address; /* NULL: 127.0.0.1 */
  unsigned short port;      /* 0: any free port */
  int tick_ms;              /* 0: 100 */
  int lockstep;
  const char* static_dir;   /* NULL: none */
  const char* session_log;  /* NULL: <run_dir>/sessions.jsonl */
  pp_ready_fn ready;
  void* user;
} pp_serve_options;

PP_API void pp_serve_options_init(pp_serve_options* options);
/* Blocks until SIGINT/SIGTERM. */
PP_API pp_status pp_serve(const pp_serve_options* options);

#ifdef __cplusplus
}
#endif

#endif
