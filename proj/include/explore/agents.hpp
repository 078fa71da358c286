#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "explore/mlp.hpp"
#include "explore/optim.hpp"
#include "explore/replay.hpp"
#include "explore/returns.hpp"
#include "explore/rng.hpp"
#include "explore/variational.hpp"

namespace explore {

// How the objective is instantiated for a training step.
//  ge                gaussian q, entropy on, lambda = 1, targets drawn from Z
//  noisynet          gaussian q, entropy off, lambda = sigma^2, mean targets
//  dqn               dirac q, entropy off, lambda = sigma^2, mean targets
//  categorical_dirac categorical head, dirac q, entropy off, lambda = 1
enum class TrainMode { ge, noisynet, dqn, categorical_dirac };

TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);

struct GeConfig {
    std::vector<std::size_t> hidden = {32};
    Activation activation = Activation::relu;
    TrainMode mode = TrainMode::ge;
    double rho = -3.0;
    bool shared_rho = true;
    double sigma = 0.1;  // return-distribution scale of the gaussian head
    double gamma = 0.99;
    std::size_t target_period = 100;
    std::size_t batch_size = 64;
    std::size_t theta_samples = 1;
    OptimizerConfig optimizer;
    // categorical head support
    std::size_t atoms = 51;
    double v_min = -10.0;
    double v_max = 10.0;
};

struct ObjectiveSettings {
    ObjectiveWeights weights;
    bool return_noise = true;
};

ObjectiveSettings objective_settings(TrainMode mode, double sigma, std::size_t theta_samples = 1);

// Uniform action with probability epsilon, otherwise the greedy one. Always
// draws exactly one uniform, plus one index when exploring.
std::size_t epsilon_greedy(std::span<const double> q_values, double epsilon, Rng& rng);

// Gauss exploration agent: a factorized Gaussian over the weights of a return
// network, a target copy, and the training step of the practical algorithm.
class GeAgent {
public:
    GeAgent(std::size_t observation_dim, std::size_t num_actions, GeConfig config, Rng& init_rng);

    // Fresh theta ~ q for this call, then greedy under it.
    std::size_t act_thompson(std::span<const double> state, Rng& theta_rng);
    // Greedy under a theta that is held until the next resample_policy().
    void resample_policy(Rng& theta_rng);
    std::size_t act_held(std::span<const double> state) const;
    std::size_t act_greedy(std::span<const double> state) const;
    std::size_t act_epsilon_greedy(std::span<const double> state, double epsilon, Rng& action_rng) const;

    std::vector<double> q_values(std::span<const double> state) const;

    // nullopt when the buffer holds fewer than batch_size transitions.
    std::optional<double> train_step(const ReplayBuffer<Transition>& buffer, Rng& replay_rng, Rng& theta_rng);
    // Same as above on an explicit batch.
    double train_on_batch(std::span<const Transition> batch, Rng& theta_rng);

    void sync_target();

    const GeConfig& config() const { return config_; }
    const ReturnHead& head() const { return head_; }
    const FactorizedGaussian& online() const { return online_; }
    FactorizedGaussian& online() { return online_; }
    const FactorizedGaussian& target() const { return target_; }
    std::uint64_t counter() const { return counter_; }

private:
    GeConfig config_;
    ReturnHead head_;
    FactorizedGaussian online_;
    FactorizedGaussian target_;
    Optimizer optimizer_;
    ParameterSample held_;
    std::uint64_t counter_ = 0;
};

struct DqnConfig {
    std::vector<std::size_t> hidden = {32};
    Activation activation = Activation::relu;
    double gamma = 0.99;
    std::size_t target_period = 100;
    std::size_t batch_size = 64;
    OptimizerConfig optimizer;
};

// Plain DQN: point-estimate Q network, hard target sync, loss 0.5 * sum (Q - y)^2.
class DqnAgent {
public:
    DqnAgent(std::size_t observation_dim, std::size_t num_actions, DqnConfig config, Rng& init_rng);

    std::size_t act(std::span<const double> state, double epsilon, Rng& action_rng) const;
    std::vector<double> q_values(std::span<const double> state) const;
    std::optional<double> train_step(const ReplayBuffer<Transition>& buffer, Rng& replay_rng);
    void sync_target();

    const std::vector<Tensor>& params() const { return params_; }
    const std::vector<Tensor>& target_params() const { return target_; }
    std::uint64_t counter() const { return counter_; }

private:
    DqnConfig config_;
    MlpSpec spec_;
    std::vector<Tensor> params_;
    std::vector<Tensor> target_;
    Optimizer optimizer_;
    std::uint64_t counter_ = 0;
};

MlpSpec make_mlp_spec(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs,
                      Activation activation);

}  // namespace explore
