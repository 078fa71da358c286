#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "explore/agents.hpp"
#include "explore/bandit.hpp"
#include "explore/ddpg.hpp"
#include "explore/harness.hpp"
#include "explore/oracle.hpp"

namespace explore {

namespace {

using Clock = std::chrono::steady_clock;

struct Streams {
    explicit Streams(std::uint64_t seed)
        : master(seed),
          env(fork(master, Stream::env)),
          init(fork(master, Stream::agent_init)),
          theta(fork(master, Stream::theta)),
          replay(fork(master, Stream::replay)),
          action(fork(master, Stream::action))
    {
    }
    Rng master, env, init, theta, replay, action;
};

struct TrajectoryPoint {
    std::size_t episode;
    std::size_t step;
    double x0;
    double x1;
};

struct RunState {
    RunResult result;
    std::vector<TrajectoryPoint> trajectory;
};

OptimizerConfig optimizer_config(const ExperimentConfig& c)
{
    OptimizerConfig o;
    o.method = parse_optimizer(c.optimizer);
    o.learning_rate = c.alpha;
    return o;
}

GeConfig ge_config(const ExperimentConfig& c)
{
    GeConfig g;
    g.hidden = c.hidden;
    g.activation = parse_activation(c.activation);
    g.mode = parse_train_mode(c.agent);
    g.rho = c.rho;
    g.shared_rho = c.shared_rho;
    g.sigma = c.sigma();
    g.gamma = c.gamma;
    g.target_period = c.tau;
    g.batch_size = c.batch;
    g.theta_samples = c.theta_samples;
    g.optimizer = optimizer_config(c);
    g.atoms = c.atoms;
    g.v_min = c.v_min;
    g.v_max = c.v_max;
    return g;
}

DqnConfig dqn_config(const ExperimentConfig& c)
{
    DqnConfig d;
    d.hidden = c.hidden;
    d.activation = parse_activation(c.activation);
    d.gamma = c.gamma;
    d.target_period = c.tau;
    d.batch_size = c.batch;
    d.optimizer = optimizer_config(c);
    return d;
}

DdpgConfig ddpg_config(const ExperimentConfig& c)
{
    DdpgConfig d;
    d.policy_hidden = c.hidden;
    d.critic_hidden = c.hidden;
    d.activation = parse_activation(c.activation);
    d.critic = parse_critic_mode(c.agent.substr(5));
    d.rho = c.rho;
    d.shared_rho = c.shared_rho;
    d.sigma = c.sigma();
    d.gamma = c.gamma;
    d.target_period = c.tau;
    d.polyak = c.polyak;
    d.polyak_rate = c.polyak_rate;
    d.batch_size = c.batch;
    d.actor_optimizer = optimizer_config(c);
    d.critic_optimizer = optimizer_config(c);
    d.action_noise = c.action_noise;
    return d;
}

bool should_stop(const ExperimentConfig& c, const std::vector<MetricsRow>& rows)
{
    if (!c.stop_at || rows.size() < kEpisodesPerIteration) return false;
    double acc = 0.0;
    for (std::size_t i = rows.size() - kEpisodesPerIteration; i < rows.size(); ++i) acc += rows[i].plotted_reward;
    return acc / static_cast<double>(kEpisodesPerIteration) >= *c.stop_at;
}

void abort_run(RunResult& r, std::size_t episode, std::string reason)
{
    r.aborted = true;
    r.aborted_episode = episode;
    r.abort_reason = std::move(reason);
}

// Shared episode bookkeeping for discrete and continuous agents.
class EpisodeLog {
public:
    EpisodeLog(const ExperimentConfig& c, const EnvSpec& spec, std::size_t episode)
        : config_(c), spec_(spec), start_(Clock::now())
    {
        row_.episode = episode;
        if (spec.id == EnvId::chain) {
            row_.visits.assign(spec.chain_length, false);
            visit(2);
        }
    }

    void visit(std::size_t state_index)
    {
        row_.visits[state_index - 1] = true;
        if (state_index > row_.max_state) row_.max_state = state_index;
    }

    // Returns the reward the agent should learn from.
    double record(StepResult& r)
    {
        ++row_.steps;
        row_.raw_return += r.info.raw_reward;
        double learn = r.reward;
        if (config_.sparse) {
            r = sparsify(spec_.id, r);
            learn = r.reward;
            row_.sparse_return += r.reward;
        } else {
            row_.sparse_return += spec_.id == EnvId::chain ? r.reward : sparsify(spec_.id, r).reward;
        }
        if (spec_.id == EnvId::chain) visit(r.info.state_index);
        if (r.done) row_.terminated = !r.info.truncated;
        return learn;
    }

    MetricsRow finish()
    {
        row_.plotted_reward = plotted_reward(spec_.id, row_);
        if (config_.timing)
            row_.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
        return row_;
    }

private:
    const ExperimentConfig& config_;
    const EnvSpec& spec_;
    Clock::time_point start_;
    MetricsRow row_;
};

void run_discrete(const ExperimentConfig& c, RunState& state)
{
    const EnvSpec spec = make_env_spec(c.env, c.chain_length);
    auto env = make_environment(spec);
    Streams rng(c.seed);

    const bool is_dqn = c.agent == "dqn";
    std::optional<DqnAgent> dqn;
    std::optional<GeAgent> ge;
    if (is_dqn) dqn.emplace(spec.observation_dim, spec.num_actions, dqn_config(c), rng.init);
    else ge.emplace(spec.observation_dim, spec.num_actions, ge_config(c), rng.init);

    std::string control = c.control;
    if (control.empty()) control = (is_dqn || c.agent == "categorical") ? "epsilon" : "thompson";
    if (is_dqn && control != "epsilon") throw std::invalid_argument("dqn only supports epsilon-greedy control");
    const bool per_episode = c.resample == "episode";

    std::vector<std::size_t> optimal;
    if (spec.id == EnvId::chain) optimal = chain_optimal_actions(spec.chain_length, c.gamma);
    auto agrees_with_oracle = [&] {
        for (std::size_t k = 2; k < spec.chain_length; ++k) {
            const auto obs = chain_observation(spec.chain_length, k);
            const std::size_t a = dqn ? argmax(dqn->q_values(obs)) : ge->act_greedy(obs);
            if (a != optimal[k - 1]) return false;
        }
        return true;
    };

    std::size_t agreement_streak = 0;

    ReplayBuffer<Transition> buffer(c.buffer);
    RunResult& result = state.result;
    for (std::size_t e = 1; e <= c.episodes; ++e) {
        EpisodeLog log(c, spec, e);
        std::vector<double> obs = env->reset(rng.env);
        if (ge && per_episode && control == "thompson") ge->resample_policy(rng.theta);
        if (c.record_trajectories && obs.size() >= 2) state.trajectory.push_back({e, 0, obs[0], obs[1]});
        bool done = false;
        while (!done) {
            std::size_t a;
            if (dqn) a = dqn->act(obs, c.epsilon, rng.action);
            else if (control == "epsilon") a = ge->act_epsilon_greedy(obs, c.epsilon, rng.action);
            else if (per_episode) a = ge->act_held(obs);
            else a = ge->act_thompson(obs, rng.theta);

            StepResult r = env->step_discrete(a);
            const double learn = log.record(r);
            done = r.done;
            buffer.push({obs, a, learn, r.observation, r.done && !r.info.truncated});
            if (c.record_trajectories && r.observation.size() >= 2)
                state.trajectory.push_back({e, env->steps(), r.observation[0], r.observation[1]});
            obs = std::move(r.observation);

            const std::optional<double> loss =
                dqn ? dqn->train_step(buffer, rng.replay) : ge->train_step(buffer, rng.replay, rng.theta);
            if (loss && !std::isfinite(*loss)) {
                abort_run(result, e, "non-finite training loss");
                return;
            }
        }
        result.rows.push_back(log.finish());
        if (spec.id == EnvId::chain && !result.first_visit_goal && result.rows.back().max_state == spec.chain_length)
            result.first_visit_goal = e;
        if (spec.id == EnvId::chain && !result.first_oracle_agreement) {
            agreement_streak = agrees_with_oracle() ? agreement_streak + 1 : 0;
            if (agreement_streak == kEpisodesPerIteration) result.first_oracle_agreement = e;
        }
        if (should_stop(c, result.rows)) break;
    }
}

void run_continuous(const ExperimentConfig& c, RunState& state)
{
    const EnvSpec spec = make_env_spec(c.env, c.chain_length);
    auto env = make_environment(spec);
    Streams rng(c.seed);
    DdpgAgent agent(spec.observation_dim, spec.action_dim, spec.action_low, spec.action_high, ddpg_config(c), rng.init);

    ReplayBuffer<ContinuousTransition> buffer(c.buffer);
    RunResult& result = state.result;
    for (std::size_t e = 1; e <= c.episodes; ++e) {
        EpisodeLog log(c, spec, e);
        std::vector<double> obs = env->reset(rng.env);
        if (c.record_trajectories && obs.size() >= 2) state.trajectory.push_back({e, 0, obs[0], obs[1]});
        bool done = false;
        while (!done) {
            std::vector<double> a = agent.act(obs, rng.action, true);
            StepResult r = env->step_continuous(a);
            const double learn = log.record(r);
            done = r.done;
            buffer.push({obs, std::move(a), learn, r.observation, r.done && !r.info.truncated});
            if (c.record_trajectories && r.observation.size() >= 2)
                state.trajectory.push_back({e, env->steps(), r.observation[0], r.observation[1]});
            obs = std::move(r.observation);
            const std::optional<double> loss = agent.train_step(buffer, rng.replay, rng.theta);
            if (loss && !std::isfinite(*loss)) {
                abort_run(result, e, "non-finite training loss");
                return;
            }
        }
        result.rows.push_back(log.finish());
        if (should_stop(c, result.rows)) break;
    }
}

void run_bandit(const ExperimentConfig& c, RunState& state)
{
    std::vector<double> means;
    {
        std::istringstream in(c.bandit_means);
        std::string part;
        while (std::getline(in, part, ',')) means.push_back(std::stod(part));
    }
    Streams rng(c.seed);
    const BanditTrace trace = run_gaussian_bandit(means, c.bandit_sigma, c.episodes, rng.action);
    for (std::size_t t = 0; t < trace.arms.size(); ++t) {
        MetricsRow row;
        row.episode = t + 1;
        row.steps = 1;
        row.raw_return = trace.rewards[t];
        row.sparse_return = trace.rewards[t];
        row.plotted_reward = means[trace.arms[t]];
        row.max_state = trace.arms[t];
        state.result.rows.push_back(row);
    }
    state.result.regret = trace.cumulative_regret;
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_outputs(const ExperimentConfig& c, const RunState& state)
{
    const std::filesystem::path dir = c.out;
    std::filesystem::create_directories(dir);
    write_metrics_csv(dir / "metrics.csv", state.result.rows);

    {
        std::ofstream cfg(dir / "config.txt", std::ios::binary);
        for (const auto& [k, v] : c.to_map()) cfg << k << " = " << v << '\n';
    }
    if (c.record_trajectories) {
        std::ofstream tr(dir / "trajectories.csv", std::ios::binary);
        tr << "episode,step,x0,x1\n";
        for (const auto& p : state.trajectory) tr << p.episode << ',' << p.step << ',' << num(p.x0) << ',' << num(p.x1) << '\n';
    }
    if (c.agent == "bandit") {
        std::ofstream rg(dir / "regret.csv", std::ios::binary);
        rg << "pull,cumulative_regret\n";
        for (std::size_t t = 0; t < state.result.regret.size(); ++t)
            rg << t + 1 << ',' << num(state.result.regret[t]) << '\n';
    }

    const RunResult& r = state.result;
    nlohmann::json j;
    j["config"] = c.to_map();
    j["episodes_completed"] = r.rows.size();
    j["aborted"] = r.aborted;
    if (r.aborted) {
        j["aborted_episode"] = r.aborted_episode;
        j["abort_reason"] = r.abort_reason;
    }
    j["final_moving_average"] = r.final_moving_average;
    if (r.first_visit_goal) j["first_goal_episode"] = *r.first_visit_goal;
    if (r.first_oracle_agreement) j["first_oracle_agreement_episode"] = *r.first_oracle_agreement;
    if (!r.regret.empty()) j["final_regret"] = r.regret.back();
    if (!r.rows.empty() && !r.rows.front().visits.empty()) {
        // Early visit frequency over the first 10 episodes and over the first iteration.
        for (std::size_t window : {std::size_t{10}, kEpisodesPerIteration}) {
            const std::size_t n = std::min(window, r.rows.size());
            j["visit_frequency_first_" + std::to_string(window)] =
                visit_frequency(std::span<const MetricsRow>(r.rows.data(), n), n);
        }
    }
    std::ofstream sum(dir / "summary.json", std::ios::binary);
    sum << j.dump(2) << '\n';
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, bool write_files)
{
    config.validate();
    RunState state;
    if (config.agent == "bandit") run_bandit(config, state);
    else if (config.agent.rfind("ddpg-", 0) == 0) run_continuous(config, state);
    else run_discrete(config, state);

    std::vector<double> plotted;
    for (const auto& row : state.result.rows) plotted.push_back(row.plotted_reward);
    if (!plotted.empty()) state.result.final_moving_average = moving_average(plotted, kEpisodesPerIteration).back();
    state.result.directory = config.out;
    if (write_files) write_outputs(config, state);
    return std::move(state.result);
}

}  // namespace explore
