#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "explore/harness.hpp"

using namespace explore;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "explore_test_harness" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

MetricsRow chain_row(std::size_t n, std::initializer_list<std::size_t> visited)
{
    MetricsRow r;
    r.visits.assign(n, false);
    for (std::size_t s : visited) r.visits[s - 1] = true;
    return r;
}

ExperimentConfig small_chain(const fs::path& out)
{
    ExperimentConfig c;
    c.env = "chain";
    c.chain_length = 10;
    c.agent = "ge";
    c.seed = 7;
    c.episodes = 12;
    c.batch = 16;
    c.hidden = {16};
    c.out = out.string();
    return c;
}

}  // namespace

TEST_CASE("discounted return")
{
    CHECK(discounted_return(std::vector<double>{1, 1, 1}, 1.0) == 3.0);
    CHECK(discounted_return(std::vector<double>{1, 0, 0, 0}, 0.3) == 1.0);
    CHECK(discounted_return(std::vector<double>{1, 1}, 0.5) == 1.5);
    CHECK(discounted_return(std::vector<double>{}, 0.9) == 0.0);
    CHECK_THROWS_AS(discounted_return(std::vector<double>{1}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(discounted_return(std::vector<double>{1}, 1.5), std::invalid_argument);
}

TEST_CASE("plotted reward per environment")
{
    MetricsRow r;
    r.steps = 137;
    CHECK(plotted_reward("cartpole", r) == 137.0);
    r.steps = 200;
    CHECK(plotted_reward("acrobot", r) == -200.0);
    r.terminated = true;
    CHECK(plotted_reward("mountaincar", r) == 1.0);
    r.terminated = false;
    CHECK(plotted_reward("mountaincar", r) == 0.0);
    r.raw_return = 12.0;
    CHECK(plotted_reward("chain", r) == 12.0);
    CHECK_THROWS_AS(plotted_reward("pong", r), std::invalid_argument);
}

TEST_CASE("visit frequency")
{
    const std::vector<MetricsRow> one = {chain_row(5, {2, 3})};
    CHECK(visit_frequency(one, 20) == std::vector<double>{0, 1, 1, 0, 0});

    const std::vector<MetricsRow> same = {chain_row(5, {1, 2}), chain_row(5, {1, 2}), chain_row(5, {1, 2})};
    CHECK(visit_frequency(same, 3) == std::vector<double>{1, 1, 0, 0, 0});

    const std::vector<MetricsRow> halves = {chain_row(4, {1, 2}), chain_row(4, {3, 4})};
    CHECK(visit_frequency(halves, 2) == std::vector<double>{0.5, 0.5, 0.5, 0.5});
    // window only covers the latest rows
    CHECK(visit_frequency(halves, 1) == std::vector<double>{0, 0, 1, 1});

    CHECK_THROWS_AS(visit_frequency(std::vector<MetricsRow>{MetricsRow{}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(visit_frequency(one, 0), std::invalid_argument);
}

TEST_CASE("moving average")
{
    const std::vector<double> flat(30, 4.5);
    CHECK(moving_average(flat) == flat);
    std::vector<double> spike(20, 0.0);
    spike.back() = 20.0;
    CHECK(moving_average(spike, 20).back() == 1.0);
    const std::vector<double> xs = {3, -1, 4, 1, 5};
    CHECK(moving_average(xs, 1) == xs);
    CHECK(moving_average(xs, 2) == std::vector<double>{3, 1, 1.5, 2.5, 3});
    CHECK_THROWS_AS(moving_average(xs, 0), std::invalid_argument);
}

TEST_CASE("first iteration reaching a threshold")
{
    std::vector<double> s(60, 0.0);
    for (std::size_t i = 40; i < 60; ++i) s[i] = 1.0;
    CHECK(first_iteration_reaching(s, 1.0) == 3u);
    CHECK_FALSE(first_iteration_reaching(s, 2.0).has_value());
}

TEST_CASE("config text, overrides and validation")
{
    ExperimentConfig c;
    apply_config_text(c, "# comment\nenv = cartpole\nagent = dqn\nalpha = 1e-4\nhidden = 64, 64\nstop_at = 150\n");
    CHECK(c.env == "cartpole");
    CHECK(c.alpha == 1e-4);
    CHECK(c.hidden == std::vector<std::size_t>{64, 64});
    CHECK(c.stop_at == 150.0);
    CHECK_NOTHROW(c.validate());
    CHECK(c.to_map().at("alpha") == "1e-04");

    CHECK_THROWS_AS(apply_config_text(c, "colour = red\n"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_text(c, "alpha = fast\n"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_text(c, "just words\n"), std::invalid_argument);
    CHECK_THROWS_AS(c.set("episodes", "-3"), std::invalid_argument);
    CHECK_THROWS_AS(c.set("sparse", "maybe"), std::invalid_argument);

    auto rejects = [](const std::string& key, const std::string& value) {
        ExperimentConfig bad;
        CHECK_THROWS_AS((bad.set(key, value), bad.validate()), std::invalid_argument);
    };
    rejects("gamma", "0");
    rejects("gamma", "1.5");
    rejects("tau", "0");
    rejects("batch", "0");
    rejects("buffer", "8");
    rejects("episodes", "0");
    rejects("epsilon", "2");
    rejects("env", "pong");
    rejects("agent", "ddpg-ge");
    rejects("sparse", "true");
    rejects("resample", "sometimes");
    rejects("chain_length", "1");

    ExperimentConfig roundtrip;
    roundtrip.set("rho", "-7.25");
    roundtrip.set("log10_sigma", "-3");
    ExperimentConfig copy;
    for (const auto& [k, v] : roundtrip.to_map()) copy.set(k, v);
    CHECK(copy.to_map() == roundtrip.to_map());
    CHECK(copy.sigma() == doctest::Approx(1e-3));
}

TEST_CASE("runs are byte-identical on rerun and episodes are contiguous")
{
    const fs::path root = scratch("determinism");
    ExperimentConfig c = small_chain(root / "a");
    const RunResult a = run_experiment(c);
    c.out = (root / "b").string();
    const RunResult b = run_experiment(c);
    const std::string ma = slurp(root / "a" / "metrics.csv");
    CHECK_FALSE(ma.empty());
    CHECK(ma == slurp(root / "b" / "metrics.csv"));
    CHECK(fs::exists(root / "a" / "summary.json"));
    CHECK(fs::exists(root / "a" / "config.txt"));

    REQUIRE(a.rows.size() == 12);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].episode == i + 1);
        CHECK(a.rows[i].steps == 19);
        CHECK(a.rows[i].visits.size() == 10);
        CHECK(a.rows[i].visits[1]);
        CHECK(a.rows[i].plotted_reward == a.rows[i].raw_return);
    }
    const CsvTable t = read_csv(root / "a" / "metrics.csv");
    CHECK(t.header == std::vector<std::string>{"episode", "steps", "raw_return", "sparse_return", "plotted_reward",
                                               "max_state", "visit_bitmap", "wall_ms"});
    REQUIRE(t.rows.size() == 12);
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.rows[i][0] == std::to_string(i + 1));

    c.seed = 8;
    c.out = (root / "c").string();
    run_experiment(c);
    CHECK(slurp(root / "c" / "metrics.csv") != ma);
}

TEST_CASE("cartpole plotted reward equals the steps column")
{
    const fs::path root = scratch("cartpole");
    ExperimentConfig c;
    c.env = "cartpole";
    c.agent = "dqn";
    c.episodes = 8;
    c.batch = 16;
    c.out = root.string();
    const RunResult r = run_experiment(c);
    const CsvTable t = read_csv(root / "metrics.csv");
    const std::size_t steps = t.column("steps"), plotted = t.column("plotted_reward");
    for (const auto& row : t.rows) CHECK(row[steps] == row[plotted]);
    for (const auto& row : r.rows) CHECK(row.visits.empty());
}

TEST_CASE("invalid config is rejected before any files appear")
{
    const fs::path root = scratch("invalid");
    ExperimentConfig c = small_chain(root / "run");
    c.gamma = 0.0;
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    CHECK_FALSE(fs::exists(root / "run"));
}

TEST_CASE("non-finite training aborts the run and records the episode")
{
    const fs::path root = scratch("abort");
    ExperimentConfig c;
    c.env = "cartpole";
    c.agent = "dqn";
    c.optimizer = "sgd";
    c.alpha = 1e150;
    c.episodes = 50;
    c.batch = 8;
    c.out = root.string();
    const RunResult r = run_experiment(c);
    CHECK(r.aborted);
    CHECK(r.aborted_episode >= 1);
    CHECK(r.rows.size() <= r.aborted_episode);
    CHECK(slurp(root / "summary.json").find("\"aborted\": true") != std::string::npos);
}

TEST_CASE("bandit runs emit a regret curve")
{
    const fs::path root = scratch("bandit");
    ExperimentConfig c;
    c.agent = "bandit";
    c.bandit_means = "0, 1";
    c.episodes = 200;
    c.out = root.string();
    const RunResult r = run_experiment(c);
    REQUIRE(r.regret.size() == 200);
    CHECK(r.regret.front() >= 0.0);
    for (std::size_t i = 1; i < r.regret.size(); ++i) CHECK(r.regret[i] >= r.regret[i - 1]);
    const CsvTable t = read_csv(root / "regret.csv");
    CHECK(t.header == std::vector<std::string>{"pull", "cumulative_regret"});
    CHECK(t.rows.size() == 200);
}

TEST_CASE("grid parsing")
{
    const auto cells = parse_grid("rho = -1, -3\nalpha = 1e-3, 1e-4, 1e-5\n# note\nhidden = 32 | 64, 64\n");
    REQUIRE(cells.size() == 12);
    CHECK(cells[0].overrides.at("rho") == "-1");
    CHECK(cells[0].overrides.at("hidden") == "32");
    CHECK(cells[1].overrides.at("hidden") == "64, 64");
    CHECK(cells[11].overrides.at("alpha") == "1e-5");
    CHECK_THROWS_AS(parse_grid("colour = red\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("rho =\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
}

TEST_CASE("a one-cell grid matches a plain run")
{
    const fs::path root = scratch("grid_one");
    ExperimentConfig base = small_chain(root);
    const auto ranks = grid_search(base, parse_grid("rho = -3\n"), 1, 1);
    REQUIRE(ranks.size() == 1);
    CHECK(ranks[0].completed == 1);

    ExperimentConfig solo = base;
    solo.out = (root / "solo").string();
    const RunResult r = run_experiment(solo);
    CHECK(ranks[0].mean_score == r.final_moving_average);
    CHECK(slurp(root / "cell_0" / "seed_7" / "metrics.csv") == slurp(root / "solo" / "metrics.csv"));
    CHECK(fs::exists(root / "ranking.csv"));
}

TEST_CASE("grid ranks a separable toy and concurrency does not change the ranking")
{
    // Bandit arms whose means differ by a constant shift: the shifted cell
    // scores higher on every seed whatever the sampler does.
    ExperimentConfig base;
    base.agent = "bandit";
    base.episodes = 60;
    const auto grid = parse_grid("bandit_means = 0, 0.5 | 10, 10.5 | 5, 5.5\n");

    const fs::path seq_dir = scratch("grid_seq");
    base.out = seq_dir.string();
    const auto seq = grid_search(base, grid, 5, 1);
    base.out = scratch("grid_par").string();
    const auto par = grid_search(base, grid, 5, 3);

    REQUIRE(seq.size() == 3);
    CHECK(seq[0].overrides.at("bandit_means") == "10, 10.5");
    CHECK(seq[1].overrides.at("bandit_means") == "5, 5.5");
    CHECK(seq[0].completed == 5);
    REQUIRE(par.size() == seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(par[i].cell == seq[i].cell);
        CHECK(par[i].mean_score == seq[i].mean_score);
    }
    CHECK(slurp(fs::path(base.out) / "ranking.csv") == slurp(seq_dir / "ranking.csv"));
}

TEST_CASE("grid failures are recorded and ranking continues")
{
    ExperimentConfig base;
    base.agent = "bandit";
    base.episodes = 20;
    base.out = scratch("grid_fail").string();
    const auto ranks = grid_search(base, parse_grid("bandit_sigma = 1, -1\n"), 2, 2);
    REQUIRE(ranks.size() == 2);
    CHECK(ranks[0].overrides.at("bandit_sigma") == "1");
    CHECK(ranks[0].completed == 2);
    CHECK(ranks[1].completed == 0);
    CHECK(ranks[1].failed == 2);
    CHECK_FALSE(ranks[1].errors.empty());
}

TEST_CASE("plots: reward, visits, trajectory and missing columns")
{
    const fs::path root = scratch("plots");
    ExperimentConfig c = small_chain(root / "ge");
    c.record_trajectories = true;
    run_experiment(c);
    c.agent = "dqn";
    c.record_trajectories = false;
    c.out = (root / "dqn").string();
    run_experiment(c);
    const std::string before = slurp(root / "ge" / "metrics.csv");

    const std::vector<fs::path> runs = {root / "ge", root / "dqn"};
    emit_plots(runs, PlotKind::reward, root / "reward.svg");
    const std::string svg = slurp(root / "reward.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("dqn") != std::string::npos);

    emit_plots(std::span(runs).first(1), PlotKind::visits, root / "visits.svg");
    CHECK(slurp(root / "visits.svg").find("<rect") != std::string::npos);
    emit_plots(std::span(runs).first(1), PlotKind::trajectory, root / "traj.svg");
    CHECK(fs::exists(root / "traj.svg"));
    CHECK(slurp(root / "ge" / "metrics.csv") == before);

    // trajectories were not recorded for the dqn run
    CHECK_THROWS(emit_plots(std::span(runs).last(1), PlotKind::trajectory, root / "none.svg"));

    const fs::path broken = root / "broken";
    fs::create_directories(broken);
    std::ofstream(broken / "metrics.csv") << "episode,steps\n1,19\n";
    const std::vector<fs::path> bad = {broken};
    try {
        emit_plots(bad, PlotKind::reward, root / "bad.svg");
        FAIL("expected a missing-column error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("plotted_reward") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_plot_kind("pie"), std::invalid_argument);
}

TEST_CASE("worker count from the environment")
{
    ::setenv("EXPLORE_WORKERS", "3", 1);
    CHECK(worker_count_from_env() == 3);
    ::setenv("EXPLORE_WORKERS", "zero", 1);
    CHECK_THROWS(worker_count_from_env());
    ::unsetenv("EXPLORE_WORKERS");
    CHECK(worker_count_from_env() >= 1);
}
