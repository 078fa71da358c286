#include "explore/explore.h"

#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "explore/harness.hpp"
#include "explore/oracle.hpp"

struct explore_config {
    explore::ExperimentConfig value;
};

struct explore_run {
    explore::RunResult value;
};

struct explore_ranking {
    std::vector<explore::GridRank> value;
};

struct explore_oracle {
    explore::FiniteHorizonResult value;
    std::vector<std::size_t> optimal;
};

namespace {

thread_local std::string last_error;

explore_status fail(explore_status s, const std::string& message)
{
    last_error = message;
    return s;
}

template <class F>
explore_status guard(F&& body)
{
    try {
        last_error.clear();
        return body();
    } catch (const std::out_of_range& e) {
        return fail(EXPLORE_ERR_OUT_OF_RANGE, e.what());
    } catch (const std::domain_error& e) {
        return fail(EXPLORE_ERR_DOMAIN, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(EXPLORE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(EXPLORE_ERR_IO, e.what());
    } catch (const std::runtime_error& e) {
        return fail(EXPLORE_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(EXPLORE_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(EXPLORE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(EXPLORE_ERR_INTERNAL, "unknown error");
    }
}

#define EXPLORE_REQUIRE(ptr)                                                   \
    do {                                                                       \
        if (!(ptr)) return fail(EXPLORE_ERR_NULL, #ptr " must not be NULL"); \
    } while (0)

explore_status copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed)
{
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) return fail(EXPLORE_ERR_BUFFER_TOO_SMALL, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return EXPLORE_OK;
}

const explore::MetricsRow& row_at(const explore_run* run, std::size_t episode)
{
    if (episode == 0 || episode > run->value.rows.size())
        throw std::out_of_range("episode " + std::to_string(episode) + " not in 1.." +
                                std::to_string(run->value.rows.size()));
    return run->value.rows[episode - 1];
}

}  // namespace

extern "C" {

const char* explore_last_error(void) { return last_error.c_str(); }

const char* explore_status_name(explore_status status)
{
    switch (status) {
    case EXPLORE_OK: return "ok";
    case EXPLORE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EXPLORE_ERR_OUT_OF_RANGE: return "out of range";
    case EXPLORE_ERR_DOMAIN: return "domain error";
    case EXPLORE_ERR_IO: return "i/o error";
    case EXPLORE_ERR_NULL: return "null pointer";
    case EXPLORE_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case EXPLORE_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

explore_status explore_config_new(explore_config** out)
{
    return guard([&] {
        EXPLORE_REQUIRE(out);
        *out = new explore_config{};
        return EXPLORE_OK;
    });
}

explore_status explore_config_load(const char* path, explore_config** out)
{
    return guard([&] {
        EXPLORE_REQUIRE(path);
        EXPLORE_REQUIRE(out);
        *out = new explore_config{explore::load_config(path)};
        return EXPLORE_OK;
    });
}

explore_status explore_config_set(explore_config* config, const char* key, const char* value)
{
    return guard([&] {
        EXPLORE_REQUIRE(config);
        EXPLORE_REQUIRE(key);
        EXPLORE_REQUIRE(value);
        config->value.set(key, value);
        return EXPLORE_OK;
    });
}

explore_status explore_config_get(const explore_config* config, const char* key, char* buf, size_t cap, size_t* needed)
{
    return guard([&] {
        EXPLORE_REQUIRE(config);
        EXPLORE_REQUIRE(key);
        const auto map = config->value.to_map();
        const auto it = map.find(key);
        if (it == map.end()) return fail(EXPLORE_ERR_INVALID_ARGUMENT, std::string("unknown config key '") + key + "'");
        return copy_out(it->second, buf, cap, needed);
    });
}

explore_status explore_config_validate(const explore_config* config)
{
    return guard([&] {
        EXPLORE_REQUIRE(config);
        config->value.validate();
        return EXPLORE_OK;
    });
}

void explore_config_free(explore_config* config) { delete config; }

explore_status explore_run_experiment(const explore_config* config, int write_files, explore_run** out)
{
    return guard([&] {
        EXPLORE_REQUIRE(config);
        EXPLORE_REQUIRE(out);
        *out = new explore_run{explore::run_experiment(config->value, write_files != 0)};
        return EXPLORE_OK;
    });
}

explore_status explore_run_episodes(const explore_run* run, size_t* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(run);
        EXPLORE_REQUIRE(out);
        *out = run->value.rows.size();
        return EXPLORE_OK;
    });
}

explore_status explore_run_plotted_reward(const explore_run* run, size_t episode, double* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(run);
        EXPLORE_REQUIRE(out);
        *out = row_at(run, episode).plotted_reward;
        return EXPLORE_OK;
    });
}

explore_status explore_run_steps(const explore_run* run, size_t episode, size_t* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(run);
        EXPLORE_REQUIRE(out);
        *out = row_at(run, episode).steps;
        return EXPLORE_OK;
    });
}

explore_status explore_run_max_state(const explore_run* run, size_t episode, size_t* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(run);
        EXPLORE_REQUIRE(out);
        *out = row_at(run, episode).max_state;
        return EXPLORE_OK;
    });
}

explore_status explore_run_final_moving_average(const explore_run* run, double* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(run);
        EXPLORE_REQUIRE(out);
        *out = run->value.final_moving_average;
        return EXPLORE_OK;
    });
}

explore_status explore_run_aborted(const explore_run* run, int* aborted, size_t* episode)
{
    return guard([&] {
        EXPLORE_REQUIRE(run);
        EXPLORE_REQUIRE(aborted);
        *aborted = run->value.aborted ? 1 : 0;
        if (episode) *episode = run->value.aborted_episode;
        return EXPLORE_OK;
    });
}

void explore_run_free(explore_run* run) { delete run; }

explore_status explore_grid_search(const explore_config* base, const char* grid_path, size_t seeds, size_t workers,
                                   explore_ranking** out)
{
    return guard([&] {
        EXPLORE_REQUIRE(base);
        EXPLORE_REQUIRE(grid_path);
        EXPLORE_REQUIRE(out);
        const auto grid = explore::load_grid(grid_path);
        if (workers == 0) workers = explore::worker_count_from_env();
        *out = new explore_ranking{explore::grid_search(base->value, grid, seeds, workers)};
        return EXPLORE_OK;
    });
}

explore_status explore_ranking_size(const explore_ranking* ranking, size_t* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(ranking);
        EXPLORE_REQUIRE(out);
        *out = ranking->value.size();
        return EXPLORE_OK;
    });
}

explore_status explore_ranking_entry(const explore_ranking* ranking, size_t rank, size_t* cell, double* mean_score,
                                     size_t* completed, size_t* failed)
{
    return guard([&] {
        EXPLORE_REQUIRE(ranking);
        const auto& r = ranking->value.at(rank);
        if (cell) *cell = r.cell;
        if (mean_score) *mean_score = r.mean_score;
        if (completed) *completed = r.completed;
        if (failed) *failed = r.failed;
        return EXPLORE_OK;
    });
}

explore_status explore_ranking_overrides(const explore_ranking* ranking, size_t rank, char* buf, size_t cap,
                                         size_t* needed)
{
    return guard([&] {
        EXPLORE_REQUIRE(ranking);
        std::string s;
        for (const auto& [k, v] : ranking->value.at(rank).overrides) s += (s.empty() ? "" : " ") + k + "=" + v;
        return copy_out(s, buf, cap, needed);
    });
}

void explore_ranking_free(explore_ranking* ranking) { delete ranking; }

explore_status explore_emit_plots(const char* const* run_dirs, size_t count, const char* kind, const char* out_file)
{
    return guard([&] {
        EXPLORE_REQUIRE(kind);
        EXPLORE_REQUIRE(out_file);
        if (count > 0) EXPLORE_REQUIRE(run_dirs);
        std::vector<std::filesystem::path> runs;
        for (std::size_t i = 0; i < count; ++i) {
            if (!run_dirs[i]) return fail(EXPLORE_ERR_NULL, "run directory entry is NULL");
            runs.emplace_back(run_dirs[i]);
        }
        explore::emit_plots(runs, explore::parse_plot_kind(kind), out_file);
        return EXPLORE_OK;
    });
}

explore_status explore_chain_oracle(size_t n, double gamma, explore_oracle** out)
{
    return guard([&] {
        EXPLORE_REQUIRE(out);
        *out = new explore_oracle{explore::chain_oracle(n, gamma), explore::chain_optimal_actions(n, gamma)};
        return EXPLORE_OK;
    });
}

explore_status explore_oracle_dims(const explore_oracle* oracle, size_t* horizon, size_t* states, size_t* actions)
{
    return guard([&] {
        EXPLORE_REQUIRE(oracle);
        const auto& q = oracle->value.q;
        if (horizon) *horizon = q.size();
        if (states) *states = q.empty() ? 0 : q[0].size();
        if (actions) *actions = q.empty() || q[0].empty() ? 0 : q[0][0].size();
        return EXPLORE_OK;
    });
}

explore_status explore_oracle_q(const explore_oracle* oracle, size_t step, size_t state, size_t action, double* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(oracle);
        EXPLORE_REQUIRE(out);
        *out = oracle->value.q.at(step).at(state).at(action);
        return EXPLORE_OK;
    });
}

explore_status explore_oracle_optimal_action(const explore_oracle* oracle, size_t state, size_t* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(oracle);
        EXPLORE_REQUIRE(out);
        *out = oracle->optimal.at(state);
        return EXPLORE_OK;
    });
}

void explore_oracle_free(explore_oracle* oracle) { delete oracle; }

explore_status explore_chain_hitting_time(size_t n, double* out)
{
    return guard([&] {
        EXPLORE_REQUIRE(out);
        *out = explore::chain_random_hitting_time(n);
        return EXPLORE_OK;
    });
}

}  // extern "C"
