#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "explore/autodiff.hpp"
#include "explore/mlp.hpp"
#include "explore/optim.hpp"
#include "explore/replay.hpp"
#include "explore/rng.hpp"
#include "explore/variational.hpp"

namespace explore {

// plain: point critic, exploration by Gaussian action noise
// noisy: randomized critic trained without the entropy term (lambda = sigma^2)
// ge:    randomized critic trained with the full variational objective
enum class CriticMode { plain, noisy, ge };

CriticMode parse_critic_mode(const std::string& name);
std::string to_string(CriticMode mode);

struct DdpgConfig {
    std::vector<std::size_t> policy_hidden = {32};
    std::vector<std::size_t> critic_hidden = {32};
    Activation activation = Activation::relu;
    CriticMode critic = CriticMode::plain;
    double rho = -3.0;
    bool shared_rho = true;
    double sigma = 0.1;
    double gamma = 0.99;
    std::size_t target_period = 100;
    bool polyak = false;
    double polyak_rate = 0.005;
    std::size_t batch_size = 64;
    OptimizerConfig actor_optimizer;
    OptimizerConfig critic_optimizer;
    double action_noise = 0.1;  // plain mode: stddev as a fraction of the action range
};

// Builds the policy output [batch, action_dim] from taped policy parameters.
using PolicyBuilder = std::function<Var(Tape&, std::span<const Var> policy_params, Var states)>;
// Builds the critic value [batch] or [batch, 1] for the given actions.
using CriticBuilder = std::function<Var(Tape&, Var states, Var actions)>;

// One ascent step on mean_t Q(s_t, pi(s_t)) with respect to the policy
// parameters only. Returns the mean critic value before the step.
double policy_gradient_step(std::vector<Tensor>& policy_params, Optimizer& optimizer, const Tensor& states,
                            const PolicyBuilder& policy, const CriticBuilder& critic);

class DdpgAgent {
public:
    DdpgAgent(std::size_t observation_dim, std::size_t action_dim, double action_low, double action_high,
              DdpgConfig config, Rng& init_rng);

    // Deterministic policy output; plain mode adds clipped Gaussian noise when
    // explore is set.
    std::vector<double> act(std::span<const double> state, Rng& action_rng, bool explore = true) const;
    std::vector<double> policy_action(std::span<const double> state) const;
    double critic_value(std::span<const double> state, std::span<const double> action) const;

    // theta_hat ~ q once, gradient of mean Q_theta_hat(s, pi(s)) into the policy.
    void actor_update(std::span<const ContinuousTransition> batch, Rng& theta_rng);
    // Variational critic objective with a' = pi_target(s') in the targets.
    double critic_update(std::span<const ContinuousTransition> batch, Rng& theta_rng);

    // critic update, actor update, counter and target sync. nullopt when the
    // buffer holds fewer than batch_size transitions.
    std::optional<double> train_step(const ReplayBuffer<ContinuousTransition>& buffer, Rng& replay_rng,
                                     Rng& theta_rng);
    void sync_targets();

    const DdpgConfig& config() const { return config_; }
    const MlpSpec& policy_spec() const { return policy_spec_; }
    const MlpSpec& critic_spec() const { return critic_spec_; }
    const std::vector<Tensor>& policy() const { return policy_; }
    const FactorizedGaussian& critic() const { return critic_; }
    FactorizedGaussian& critic() { return critic_; }
    const std::vector<Tensor>& target_policy() const { return target_policy_; }
    const FactorizedGaussian& target_critic() const { return target_critic_; }
    std::uint64_t counter() const { return counter_; }

private:
    Var taped_policy(Tape& tape, std::span<const Var> params, Var states) const;

    DdpgConfig config_;
    std::size_t action_dim_;
    double low_;
    double high_;
    MlpSpec policy_spec_;
    MlpSpec critic_spec_;
    std::vector<Tensor> policy_;
    std::vector<Tensor> target_policy_;
    FactorizedGaussian critic_;
    FactorizedGaussian target_critic_;
    Optimizer actor_opt_;
    Optimizer critic_opt_;
    std::uint64_t counter_ = 0;
};

}  // namespace explore
