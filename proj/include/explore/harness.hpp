#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "explore/envs.hpp"

namespace explore {

// ---------------------------------------------------------------- config

// Flat key = value experiment description. Every field has a default so a
// config file only needs the keys it changes.
struct ExperimentConfig {
    std::string env = "chain";
    std::size_t chain_length = 10;
    bool sparse = false;
    std::string agent = "ge";  // ge noisynet dqn categorical ddpg-plain ddpg-noisy ddpg-ge bandit

    double rho = -3.0;
    double log10_sigma = -1.0;
    double alpha = 1e-3;
    double gamma = 0.99;
    std::size_t tau = 100;
    std::size_t batch = 64;
    std::size_t buffer = 100000;
    std::size_t episodes = 100;
    std::uint64_t seed = 0;
    std::string out = "runs/run";

    std::vector<std::size_t> hidden = {32};
    std::string activation = "relu";
    std::string optimizer = "adam";
    double epsilon = 0.1;
    bool shared_rho = true;
    std::string resample = "step";  // step | episode
    std::string control = "";       // thompson | epsilon; empty = agent default
    std::size_t theta_samples = 1;
    std::size_t atoms = 51;
    double v_min = -10.0;
    double v_max = 10.0;
    double action_noise = 0.1;
    bool polyak = false;
    double polyak_rate = 0.005;

    std::string bandit_means = "0,1";
    double bandit_sigma = 1.0;

    bool record_trajectories = false;
    bool timing = false;  // wall_ms column; off keeps metrics.csv reproducible
    // stop once the 20-episode moving average of plotted_reward reaches this
    std::optional<double> stop_at;

    double sigma() const;
    void set(const std::string& key, const std::string& value);
    std::map<std::string, std::string> to_map() const;
    void validate() const;
};

std::vector<std::string> config_keys();
ExperimentConfig load_config(const std::filesystem::path& file);
void apply_config_text(ExperimentConfig& config, const std::string& text);

// ---------------------------------------------------------------- metrics

struct MetricsRow {
    std::size_t episode = 0;
    std::size_t steps = 0;
    double raw_return = 0.0;
    double sparse_return = 0.0;
    double plotted_reward = 0.0;
    std::size_t max_state = 0;
    std::vector<bool> visits;  // chain only; visits[i] is s_{i+1}
    double wall_ms = 0.0;
    bool terminated = false;   // ended by the task rather than the step cap
};

double discounted_return(std::span<const double> rewards, double gamma);
double plotted_reward(EnvId env, const MetricsRow& row);
double plotted_reward(const std::string& env, const MetricsRow& row);
std::vector<double> moving_average(std::span<const double> series, std::size_t window = 20);
// Mean visit bitmap over the last `window` rows.
std::vector<double> visit_frequency(std::span<const MetricsRow> rows, std::size_t window);

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& file, std::span<const MetricsRow> rows);

// ---------------------------------------------------------------- runs

constexpr std::size_t kEpisodesPerIteration = 20;

struct RunResult {
    std::vector<MetricsRow> rows;
    std::filesystem::path directory;
    bool aborted = false;
    std::size_t aborted_episode = 0;
    std::string abort_reason;
    double final_moving_average = 0.0;
    std::optional<std::size_t> first_visit_goal;  // chain: first episode that reached s_N
    // chain: first episode that closes 20 consecutive episodes after each of
    // which the greedy policy matched the backward-induction optimum at every
    // interior state s_2..s_{N-1}
    std::optional<std::size_t> first_oracle_agreement;
    std::vector<double> regret;                   // bandit only
};

// Runs the configured experiment. When write_files is set, the run directory
// config.out receives metrics.csv, summary.json, config.txt and (optionally)
// trajectories.csv / regret.csv.
RunResult run_experiment(const ExperimentConfig& config, bool write_files = true);

// First iteration (1-based, 20 episodes each) whose trailing 20-episode mean of
// the series reaches threshold.
std::optional<std::size_t> first_iteration_reaching(std::span<const double> series, double threshold);

// ---------------------------------------------------------------- grid search

struct GridCell {
    std::map<std::string, std::string> overrides;
};

struct GridRank {
    std::size_t cell = 0;
    std::map<std::string, std::string> overrides;
    double mean_score = 0.0;
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::vector<std::string> errors;
};

// Grid file: one "key = v1, v2, ..." line per swept key. Cells are the
// cartesian product in file order.
std::vector<GridCell> parse_grid(const std::string& text);
std::vector<GridCell> load_grid(const std::filesystem::path& file);

std::size_t worker_count_from_env();

// Runs every cell for seeds base.seed .. base.seed + seeds - 1 under
// base.out/cell_<i>/seed_<s>, ranks cells by the seed-mean final moving
// average of plotted_reward, and writes base.out/ranking.csv.
std::vector<GridRank> grid_search(const ExperimentConfig& base, const std::vector<GridCell>& grid, std::size_t seeds,
                                  std::size_t workers);

// ---------------------------------------------------------------- plots

enum class PlotKind { reward, visits, trajectory };
PlotKind parse_plot_kind(const std::string& name);

// Reads metrics.csv (and trajectories.csv for trajectory plots) from each run
// directory and writes an SVG file.
void emit_plots(std::span<const std::filesystem::path> runs, PlotKind kind, const std::filesystem::path& out);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(const std::string& name) const;  // throws naming the column
};
CsvTable read_csv(const std::filesystem::path& file);

}  // namespace explore
