#include "explore/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "explore/agents.hpp"
#include "explore/returns.hpp"

namespace explore {

CriticMode parse_critic_mode(const std::string& name)
{
    if (name == "plain") return CriticMode::plain;
    if (name == "noisy" || name == "noisynet") return CriticMode::noisy;
    if (name == "ge") return CriticMode::ge;
    throw std::invalid_argument("unknown critic mode '" + name + "'");
}

std::string to_string(CriticMode mode)
{
    switch (mode) {
    case CriticMode::plain: return "plain";
    case CriticMode::noisy: return "noisy";
    case CriticMode::ge: return "ge";
    }
    return "unknown";
}

double policy_gradient_step(std::vector<Tensor>& policy_params, Optimizer& optimizer, const Tensor& states,
                            const PolicyBuilder& policy, const CriticBuilder& critic)
{
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& p : policy_params) leaves.push_back(tape.leaf(p));
    const Var s = tape.constant(states);
    const Var q = critic(tape, s, policy(tape, leaves, s));
    const Var mean_q = tape.mean(q);
    const double value = tape.value(mean_q).item();
    tape.backward(tape.scale(mean_q, -1.0));
    std::vector<Tensor*> ptrs;
    for (std::size_t i = 0; i < policy_params.size(); ++i) {
        policy_params[i].set_grad(tape.grad(leaves[i]));
        ptrs.push_back(&policy_params[i]);
    }
    optimizer.step(ptrs);
    return value;
}

namespace {

QMode critic_qmode(CriticMode m) { return m == CriticMode::plain ? QMode::dirac : QMode::gaussian; }

TrainMode critic_train_mode(CriticMode m)
{
    switch (m) {
    case CriticMode::plain: return TrainMode::dqn;
    case CriticMode::noisy: return TrainMode::noisynet;
    case CriticMode::ge: return TrainMode::ge;
    }
    return TrainMode::dqn;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::vector<double> squash(std::vector<double> raw, double low, double high)
{
    const double center = 0.5 * (low + high);
    const double half = 0.5 * (high - low);
    for (double& v : raw) v = center + half * std::tanh(v);
    return raw;
}

void blend(std::vector<Tensor>& target, const std::vector<Tensor>& source, double rate)
{
    for (std::size_t l = 0; l < target.size(); ++l)
        for (std::size_t i = 0; i < target[l].size(); ++i)
            target[l][i] = (1.0 - rate) * target[l][i] + rate * source[l][i];
}

}  // namespace

DdpgAgent::DdpgAgent(std::size_t observation_dim, std::size_t action_dim, double action_low, double action_high,
                     DdpgConfig config, Rng& init_rng)
    : config_(std::move(config)),
      action_dim_(action_dim),
      low_(action_low),
      high_(action_high),
      policy_spec_(make_mlp_spec(observation_dim, config_.policy_hidden, action_dim, config_.activation)),
      critic_spec_(make_mlp_spec(observation_dim + action_dim, config_.critic_hidden, 1, config_.activation)),
      actor_opt_(config_.actor_optimizer),
      critic_opt_(config_.critic_optimizer)
{
    if (!(action_high > action_low)) throw std::invalid_argument("action bounds are empty");
    if (!(config_.gamma > 0.0) || config_.gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(config_.sigma > 0.0)) throw std::invalid_argument("critic sigma must be > 0");
    if (config_.target_period == 0 || config_.batch_size == 0)
        throw std::invalid_argument("target period and batch size must be >= 1");
    policy_ = init_mlp(policy_spec_, init_rng);
    critic_ = FactorizedGaussian(init_mlp(critic_spec_, init_rng), config_.rho, critic_qmode(config_.critic),
                                 config_.shared_rho);
    target_policy_ = policy_;
    target_critic_ = critic_;
}

std::vector<double> DdpgAgent::policy_action(std::span<const double> state) const
{
    return squash(mlp_forward(policy_spec_, policy_, state), low_, high_);
}

std::vector<double> DdpgAgent::act(std::span<const double> state, Rng& action_rng, bool explore) const
{
    std::vector<double> a = policy_action(state);
    if (explore && config_.critic == CriticMode::plain) {
        const double scale = config_.action_noise * (high_ - low_);
        for (double& v : a) v = std::clamp(v + scale * action_rng.normal(), low_, high_);
    }
    return a;
}

double DdpgAgent::critic_value(std::span<const double> state, std::span<const double> action) const
{
    return mlp_forward(critic_spec_, critic_.mu(), concat(state, action))[0];
}

Var DdpgAgent::taped_policy(Tape& tape, std::span<const Var> params, Var states) const
{
    const double center = 0.5 * (low_ + high_);
    const double half = 0.5 * (high_ - low_);
    return tape.offset(tape.scale(tape.tanh(mlp_forward(tape, policy_spec_, params, states)), half), center);
}

void DdpgAgent::actor_update(std::span<const ContinuousTransition> batch, Rng& theta_rng)
{
    if (batch.empty()) throw std::invalid_argument("actor update on an empty batch");
    const ParameterSample critic_sample = sample_parameters(critic_, theta_rng);
    std::vector<std::vector<double>> rows;
    for (const auto& t : batch) rows.push_back(t.state);

    const PolicyBuilder policy = [this](Tape& tape, std::span<const Var> params, Var states) {
        return taped_policy(tape, params, states);
    };
    const CriticBuilder critic = [this, &critic_sample](Tape& tape, Var states, Var actions) {
        std::vector<Var> theta;
        for (const Tensor& t : critic_sample.theta) theta.push_back(tape.constant(t));
        return mlp_forward(tape, critic_spec_, theta, tape.concat_cols(states, actions));
    };
    policy_gradient_step(policy_, actor_opt_, stack_rows(rows), policy, critic);
}

double DdpgAgent::critic_update(std::span<const ContinuousTransition> batch, Rng& theta_rng)
{
    if (batch.empty()) throw std::invalid_argument("critic update on an empty batch");
    const ObjectiveSettings settings = objective_settings(critic_train_mode(config_.critic), config_.sigma);

    const bool dirac = target_critic_.mode() == QMode::dirac;
    std::vector<Tensor> target_sigma;
    if (!dirac) target_sigma = target_critic_.sigma();

    std::vector<double> targets;
    std::vector<std::vector<double>> inputs;
    for (const auto& t : batch) {
        inputs.push_back(concat(t.state, t.action));
        if (t.done) {
            targets.push_back(t.reward);
            continue;
        }
        const auto next_action = squash(mlp_forward(policy_spec_, target_policy_, t.next_state), low_, high_);
        const auto x = concat(t.next_state, next_action);
        double z = dirac ? mlp_forward(critic_spec_, target_critic_.mu(), x)[0]
                         : mlp_sample_forward(critic_spec_, target_critic_.mu(), target_sigma, x, theta_rng)[0];
        if (settings.return_noise) z += config_.sigma * theta_rng.normal();
        targets.push_back(t.reward + config_.gamma * z);
    }

    const Tensor input = stack_rows(inputs);
    const Tensor target = Tensor::vector(std::move(targets));
    const std::size_t n = batch.size();
    const double sigma = config_.sigma;
    const NllBuilder nll = [&](Tape& tape, std::span<const Var> theta, double scale) {
        const Var q = tape.reshape(mlp_forward(tape, critic_spec_, theta, tape.constant(input)), {n});
        const Var diff = tape.subtract(q, tape.constant(target));
        return tape.scale(tape.sum(tape.square(diff)), scale / (2.0 * sigma * sigma));
    };
    const ObjectiveResult r = variational_objective(critic_, settings.weights, nll, &theta_rng);
    const auto params = critic_.trainable();
    critic_opt_.step(params);
    return r.value;
}

std::optional<double> DdpgAgent::train_step(const ReplayBuffer<ContinuousTransition>& buffer, Rng& replay_rng,
                                            Rng& theta_rng)
{
    if (buffer.size() < config_.batch_size) return std::nullopt;
    const auto batch = buffer.sample(config_.batch_size, replay_rng);
    const double loss = critic_update(batch, theta_rng);
    actor_update(batch, theta_rng);
    ++counter_;
    if (config_.polyak) {
        blend(target_policy_, policy_, config_.polyak_rate);
        blend(target_critic_.mu(), critic_.mu(), config_.polyak_rate);
        blend(target_critic_.rho(), critic_.rho(), config_.polyak_rate);
    } else if (counter_ % config_.target_period == 0) {
        sync_targets();
    }
    return loss;
}

void DdpgAgent::sync_targets()
{
    target_policy_ = policy_;
    target_critic_ = critic_;
    for (Tensor& t : target_policy_) t.clear_grad();
    for (Tensor& t : target_critic_.mu()) t.clear_grad();
    for (Tensor& t : target_critic_.rho()) t.clear_grad();
}

}  // namespace explore
