#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "explore/explore.h"

namespace {

struct CliError {
    std::string message;
};

void check(explore_status s, const char* what)
{
    if (s != EXPLORE_OK) throw CliError{std::string(what) + ": " + explore_status_name(s) + ": " + explore_last_error()};
}

// Owns a config handle built from a file plus command-line overrides.
class Config {
public:
    Config(const std::string& path, const std::vector<std::string>& sets)
    {
        check(path.empty() ? explore_config_new(&handle_) : explore_config_load(path.c_str(), &handle_), "config");
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CliError{"--set expects key=value, got '" + kv + "'"};
            set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    }
    ~Config() { explore_config_free(handle_); }
    Config(const Config&) = delete;
    Config& operator=(const Config&) = delete;

    void set(const std::string& key, const std::string& value)
    {
        check(explore_config_set(handle_, key.c_str(), value.c_str()), ("--" + key).c_str());
    }
    std::string get(const std::string& key) const
    {
        std::size_t needed = 0;
        explore_config_get(handle_, key.c_str(), nullptr, 0, &needed);
        std::string out(needed, '\0');
        check(explore_config_get(handle_, key.c_str(), out.data(), out.size(), &needed), "config");
        out.resize(needed - 1);
        return out;
    }
    explore_config* get() const { return handle_; }

private:
    explore_config* handle_ = nullptr;
};

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets, const std::string& seed,
            const std::string& out)
{
    Config config(config_path, sets);
    if (!seed.empty()) config.set("seed", seed);
    if (!out.empty()) config.set("out", out);
    check(explore_config_validate(config.get()), "config");

    explore_run* run = nullptr;
    check(explore_run_experiment(config.get(), 1, &run), "run");
    std::size_t episodes = 0;
    double final_avg = 0.0;
    int aborted = 0;
    std::size_t aborted_at = 0;
    explore_run_episodes(run, &episodes);
    explore_run_final_moving_average(run, &final_avg);
    explore_run_aborted(run, &aborted, &aborted_at);
    explore_run_free(run);

    std::printf("%s: %zu episodes, final moving average %.6g\n", config.get("out").c_str(), episodes, final_avg);
    if (aborted) {
        std::fprintf(stderr, "error: run aborted at episode %zu (non-finite values)\n", aborted_at);
        return 2;
    }
    return 0;
}

int cmd_grid(const std::string& config_path, const std::vector<std::string>& sets, const std::string& grid,
             std::size_t seeds, std::size_t workers, const std::string& out)
{
    Config config(config_path, sets);
    if (!out.empty()) config.set("out", out);
    explore_ranking* ranking = nullptr;
    check(explore_grid_search(config.get(), grid.c_str(), seeds, workers, &ranking), "grid");
    std::size_t n = 0;
    explore_ranking_size(ranking, &n);
    std::printf("rank  score         ok/fail  cell\n");
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t cell = 0, done = 0, failed = 0;
        double score = 0.0;
        explore_ranking_entry(ranking, r, &cell, &score, &done, &failed);
        char buf[512];
        std::size_t needed = 0;
        std::string overrides;
        if (explore_ranking_overrides(ranking, r, buf, sizeof buf, &needed) == EXPLORE_OK) overrides = buf;
        std::printf("%-5zu %-13.6g %zu/%-6zu %s\n", r + 1, score, done, failed, overrides.c_str());
    }
    explore_ranking_free(ranking);
    std::printf("ranking written to %s/ranking.csv\n", config.get("out").c_str());
    return 0;
}

int cmd_plot(const std::vector<std::string>& runs, const std::string& kind, const std::string& out)
{
    std::vector<const char*> dirs;
    for (const auto& r : runs) dirs.push_back(r.c_str());
    check(explore_emit_plots(dirs.data(), dirs.size(), kind.c_str(), out.c_str()), "plot");
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_oracle(const std::string& env, std::size_t n, double gamma, bool all_steps)
{
    if (env != "chain") throw CliError{"oracle: only the chain environment has a tabular oracle"};
    explore_oracle* oracle = nullptr;
    check(explore_chain_oracle(n, gamma, &oracle), "oracle");
    std::size_t horizon = 0, states = 0, actions = 0;
    explore_oracle_dims(oracle, &horizon, &states, &actions);
    const char* names[] = {"left", "right"};
    auto row = [&](std::size_t t, std::size_t s) {
        double left = 0.0, right = 0.0;
        explore_oracle_q(oracle, t, s, 0, &left);
        explore_oracle_q(oracle, t, s, 1, &right);
        std::printf("%-5zu s_%-4zu %-14.8g %-14.8g", t, s + 1, left, right);
    };
    std::printf("step  state  Q*(left)       Q*(right)      best\n");
    if (all_steps) {
        for (std::size_t t = 0; t < horizon; ++t)
            for (std::size_t s = 0; s < states; ++s) {
                double l = 0.0, r = 0.0;
                explore_oracle_q(oracle, t, s, 0, &l);
                explore_oracle_q(oracle, t, s, 1, &r);
                row(t, s);
                std::printf(" %s\n", l == r ? "tie" : names[r > l ? 1 : 0]);
            }
    } else {
        for (std::size_t s = 0; s < states; ++s) {
            const std::size_t t = s >= 1 ? s - 1 : 1;
            std::size_t best = 0;
            explore_oracle_optimal_action(oracle, s, &best);
            row(t, s);
            std::printf(" %s\n", names[best]);
        }
    }
    explore_oracle_free(oracle);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exploration experiments: runs, grids, plots and the chain oracle"};
    app.require_subcommand(1);

    std::string config_path, seed, out, grid_path, kind, env = "chain";
    std::vector<std::string> sets, runs;
    std::size_t seeds = 1, workers = 0, n = 10;
    double gamma = 0.99;
    bool all_steps = false;

    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "master seed (overrides the file)");
    run->add_option("--out", out, "output directory (overrides the file)");
    run->add_option("--set", sets, "extra key=value override, repeatable");

    auto* grid = app.add_subcommand("grid", "grid search over a base config");
    grid->add_option("--config", config_path, "base config file")->required()->check(CLI::ExistingFile);
    grid->add_option("--grid", grid_path, "grid file: key = v1, v2, ...")->required()->check(CLI::ExistingFile);
    grid->add_option("--seeds", seeds, "seeds per cell")->required()->check(CLI::PositiveNumber);
    grid->add_option("--workers", workers, "worker threads (default: EXPLORE_WORKERS or hardware threads)");
    grid->add_option("--out", out, "output root (overrides the file)");
    grid->add_option("--set", sets, "extra key=value override, repeatable");

    auto* plot = app.add_subcommand("plot", "render SVG plots from run directories");
    plot->add_option("--runs", runs, "run directories")->required()->expected(1, -1);
    plot->add_option("--kind", kind, "reward, visits or trajectory")
        ->required()
        ->check(CLI::IsMember({"reward", "visits", "trajectory"}));
    plot->add_option("--out", out, "output SVG file")->required();

    auto* oracle = app.add_subcommand("oracle", "print the optimal Q table of a tabular environment");
    oracle->add_option("--env", env, "environment (chain)");
    oracle->add_option("--n", n, "chain length")->check(CLI::Range(3, 100000));
    oracle->add_option("--gamma", gamma, "discount in (0, 1]");
    oracle->add_flag("--all", all_steps, "print every step of the horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(config_path, sets, seed, out);
        if (*grid) return cmd_grid(config_path, sets, grid_path, seeds, workers, out);
        if (*plot) return cmd_plot(runs, kind, out);
        if (*oracle) return cmd_oracle(env, n, gamma, all_steps);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return 1;
    }
    return 1;
}
