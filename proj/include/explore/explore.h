#ifndef EXPLORE_EXPLORE_H
#define EXPLORE_EXPLORE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EXPLORE_API __declspec(dllexport)
#else
#define EXPLORE_API __attribute__((visibility("default")))
#endif

typedef enum explore_status {
    EXPLORE_OK = 0,
    EXPLORE_ERR_INVALID_ARGUMENT = 1,
    EXPLORE_ERR_OUT_OF_RANGE = 2,
    EXPLORE_ERR_DOMAIN = 3,
    EXPLORE_ERR_IO = 4,
    EXPLORE_ERR_NULL = 5,
    EXPLORE_ERR_BUFFER_TOO_SMALL = 6,
    EXPLORE_ERR_INTERNAL = 7
} explore_status;

typedef struct explore_config explore_config;
typedef struct explore_run explore_run;
typedef struct explore_ranking explore_ranking;
typedef struct explore_oracle explore_oracle;

/* Message for the last failing call on this thread; "" when none. */
EXPLORE_API const char* explore_last_error(void);
EXPLORE_API const char* explore_status_name(explore_status status);

/* Strings are copied into buf (cap bytes, NUL included). *needed, when not
   NULL, receives the full length plus one, also on EXPLORE_ERR_BUFFER_TOO_SMALL. */

EXPLORE_API explore_status explore_config_new(explore_config** out);
EXPLORE_API explore_status explore_config_load(const char* path, explore_config** out);
EXPLORE_API explore_status explore_config_set(explore_config* config, const char* key, const char* value);
EXPLORE_API explore_status explore_config_get(const explore_config* config, const char* key, char* buf, size_t cap,
                                              size_t* needed);
EXPLORE_API explore_status explore_config_validate(const explore_config* config);
EXPLORE_API void explore_config_free(explore_config* config);

/* Runs the experiment; with write_files != 0 the output directory is filled. */
EXPLORE_API explore_status explore_run_experiment(const explore_config* config, int write_files, explore_run** out);
EXPLORE_API explore_status explore_run_episodes(const explore_run* run, size_t* out);
/* episode is 1-based. */
EXPLORE_API explore_status explore_run_plotted_reward(const explore_run* run, size_t episode, double* out);
EXPLORE_API explore_status explore_run_steps(const explore_run* run, size_t episode, size_t* out);
EXPLORE_API explore_status explore_run_max_state(const explore_run* run, size_t episode, size_t* out);
EXPLORE_API explore_status explore_run_final_moving_average(const explore_run* run, double* out);
/* *aborted is 0 or 1; *episode is the offending episode when aborted. */
EXPLORE_API explore_status explore_run_aborted(const explore_run* run, int* aborted, size_t* episode);
EXPLORE_API void explore_run_free(explore_run* run);

/* workers == 0 reads EXPLORE_WORKERS (default: hardware threads). */
EXPLORE_API explore_status explore_grid_search(const explore_config* base, const char* grid_path, size_t seeds,
                                               size_t workers, explore_ranking** out);
EXPLORE_API explore_status explore_ranking_size(const explore_ranking* ranking, size_t* out);
/* rank is 0-based, best first. overrides is "key=value key=value". */
EXPLORE_API explore_status explore_ranking_entry(const explore_ranking* ranking, size_t rank, size_t* cell,
                                                 double* mean_score, size_t* completed, size_t* failed);
EXPLORE_API explore_status explore_ranking_overrides(const explore_ranking* ranking, size_t rank, char* buf,
                                                     size_t cap, size_t* needed);
EXPLORE_API void explore_ranking_free(explore_ranking* ranking);

/* kind is "reward", "visits" or "trajectory". */
EXPLORE_API explore_status explore_emit_plots(const char* const* run_dirs, size_t count, const char* kind,
                                              const char* out_file);

/* Finite-horizon optimal Q for chain(n) over its n + 9 step episode. States are
   0-based (0 is s_1); action 0 is left, 1 is right. */
EXPLORE_API explore_status explore_chain_oracle(size_t n, double gamma, explore_oracle** out);
EXPLORE_API explore_status explore_oracle_dims(const explore_oracle* oracle, size_t* horizon, size_t* states,
                                               size_t* actions);
EXPLORE_API explore_status explore_oracle_q(const explore_oracle* oracle, size_t step, size_t state, size_t action,
                                            double* out);
/* Optimal action at s_{state+1} from the earliest step it is reachable; state is 0-based. */
EXPLORE_API explore_status explore_oracle_optimal_action(const explore_oracle* oracle, size_t state, size_t* out);
EXPLORE_API void explore_oracle_free(explore_oracle* oracle);

EXPLORE_API explore_status explore_chain_hitting_time(size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
