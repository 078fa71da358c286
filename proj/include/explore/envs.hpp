#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "explore/rng.hpp"

namespace explore {

enum class EnvId { chain, cartpole, mountaincar, acrobot, pendulum_continuous };

struct EnvSpec {
    EnvId id = EnvId::chain;
    std::size_t chain_length = 0;  // chain only
    bool discrete = true;
    std::size_t num_actions = 0;   // discrete
    std::size_t action_dim = 0;    // continuous
    double action_low = 0.0;
    double action_high = 0.0;
    std::size_t observation_dim = 0;
    std::size_t max_steps = 0;

    std::string name() const;
};

// Accepts "chain(N)" / "chain:N" / "chain" (with chain_length), "cartpole",
// "mountaincar", "acrobot" and "pendulum_continuous".
EnvSpec make_env_spec(const std::string& id, std::size_t chain_length = 10);
EnvId parse_env_id(const std::string& id);
std::string to_string(EnvId id);

struct StepInfo {
    double raw_reward = 0.0;
    std::size_t state_index = 0;  // chain: 1..N
    bool truncated = false;       // ended by the step cap rather than by the task
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;
    virtual std::vector<double> reset(Rng& rng) = 0;
    virtual StepResult step_discrete(std::size_t action);
    virtual StepResult step_continuous(std::span<const double> action);

    std::size_t steps() const { return steps_; }
    bool done() const { return done_; }

protected:
    void begin_episode()
    {
        steps_ = 0;
        done_ = false;
        started_ = true;
    }
    // Call before advancing; throws once the episode is over.
    void check_active() const;
    // Bumps the counter and applies the step cap.
    void finish_step(StepResult& r);

private:
    std::size_t steps_ = 0;
    bool done_ = false;
    bool started_ = false;
};

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);

// Chain with N states s_1..s_N; action 0 = left, 1 = right. s_1 and s_N are
// absorbing. The reward is that of the state the agent lands in: 1/1000 in s_1,
// 1 in s_N, 0 elsewhere. Episodes last exactly N + 9 steps and start in s_2.
StepResult chain_step(std::size_t n, std::size_t state_index, std::size_t action, std::size_t step_count);
std::vector<double> chain_observation(std::size_t n, std::size_t state_index);

class ChainEnv final : public Environment {
public:
    explicit ChainEnv(std::size_t n);
    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(Rng& rng) override;
    StepResult step_discrete(std::size_t action) override;
    std::size_t state_index() const { return state_; }

private:
    EnvSpec spec_;
    std::size_t state_ = 2;
};

struct CartPoleState {
    double x = 0.0, x_dot = 0.0, theta = 0.0, theta_dot = 0.0;
};

// Euler-integrated cart-pole. force is applied to the cart (positive = right).
CartPoleState cartpole_dynamics(const CartPoleState& s, double force);
bool cartpole_failed(const CartPoleState& s);

class CartPoleEnv final : public Environment {
public:
    // continuous = true gives pendulum_continuous: force in [-10, 10].
    explicit CartPoleEnv(bool continuous);
    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(Rng& rng) override;
    StepResult step_discrete(std::size_t action) override;
    StepResult step_continuous(std::span<const double> action) override;

    void set_state(const CartPoleState& s) { state_ = s; }
    const CartPoleState& state() const { return state_; }

private:
    StepResult advance(double force);
    std::vector<double> observation() const;

    EnvSpec spec_;
    CartPoleState state_;
};

class MountainCarEnv final : public Environment {
public:
    MountainCarEnv();
    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(Rng& rng) override;
    StepResult step_discrete(std::size_t action) override;

    void set_state(double position, double velocity)
    {
        position_ = position;
        velocity_ = velocity;
    }
    double position() const { return position_; }
    double velocity() const { return velocity_; }

private:
    EnvSpec spec_;
    double position_ = -0.5;
    double velocity_ = 0.0;
};

class AcrobotEnv final : public Environment {
public:
    AcrobotEnv();
    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(Rng& rng) override;
    StepResult step_discrete(std::size_t action) override;

    const std::vector<double>& state() const { return state_; }

private:
    std::vector<double> observation() const;

    EnvSpec spec_;
    std::vector<double> state_ = std::vector<double>(4, 0.0);  // theta1, theta2, dtheta1, dtheta2
};

// Sparse reward rule: mountaincar / acrobot give 1 on the step that reaches the
// goal, cartpole / pendulum_continuous give -1 on the step that fails, and
// every other step (including a step-cap truncation) gives 0. The raw reward is
// kept in info.raw_reward.
StepResult sparsify(EnvId id, StepResult raw);

}  // namespace explore
