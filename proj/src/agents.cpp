#include "explore/agents.hpp"

#include <stdexcept>

namespace explore {

TrainMode parse_train_mode(const std::string& name)
{
    if (name == "ge") return TrainMode::ge;
    if (name == "noisynet") return TrainMode::noisynet;
    if (name == "dqn") return TrainMode::dqn;
    if (name == "categorical" || name == "categorical-dirac" || name == "categorical_dirac")
        return TrainMode::categorical_dirac;
    throw std::invalid_argument("unknown training mode '" + name + "'");
}

std::string to_string(TrainMode mode)
{
    switch (mode) {
    case TrainMode::ge: return "ge";
    case TrainMode::noisynet: return "noisynet";
    case TrainMode::dqn: return "dqn";
    case TrainMode::categorical_dirac: return "categorical";
    }
    return "unknown";
}

ObjectiveSettings objective_settings(TrainMode mode, double sigma, std::size_t theta_samples)
{
    ObjectiveSettings s;
    s.weights.samples = theta_samples;
    switch (mode) {
    case TrainMode::ge:
        s.weights.entropy_on = true;
        s.weights.likelihood_scale = 1.0;
        s.return_noise = true;
        break;
    case TrainMode::noisynet:
    case TrainMode::dqn:
        s.weights.entropy_on = false;
        s.weights.likelihood_scale = sigma * sigma;
        s.return_noise = false;
        break;
    case TrainMode::categorical_dirac:
        s.weights.entropy_on = false;
        s.weights.likelihood_scale = 1.0;
        s.return_noise = true;
        break;
    }
    return s;
}

std::size_t epsilon_greedy(std::span<const double> q_values, double epsilon, Rng& rng)
{
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0, 1]");
    if (rng.uniform() < epsilon) return rng.index(q_values.size());
    return argmax(q_values);
}

MlpSpec make_mlp_spec(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs,
                      Activation activation)
{
    MlpSpec spec;
    spec.widths.push_back(inputs);
    spec.widths.insert(spec.widths.end(), hidden.begin(), hidden.end());
    spec.widths.push_back(outputs);
    spec.hidden = activation;
    spec.validate();
    return spec;
}

namespace {

ReturnHead make_head(std::size_t observation_dim, std::size_t num_actions, const GeConfig& c)
{
    if (c.mode == TrainMode::categorical_dirac) {
        if (c.atoms < 2 || !(c.v_max > c.v_min)) throw std::invalid_argument("categorical support is empty");
        std::vector<double> atoms(c.atoms);
        for (std::size_t k = 0; k < c.atoms; ++k)
            atoms[k] = c.v_min + (c.v_max - c.v_min) * static_cast<double>(k) / static_cast<double>(c.atoms - 1);
        return ReturnHead::categorical(make_mlp_spec(observation_dim, c.hidden, num_actions * c.atoms, c.activation),
                                       std::move(atoms));
    }
    return ReturnHead::gaussian(make_mlp_spec(observation_dim, c.hidden, num_actions, c.activation), c.sigma);
}

void validate(const GeConfig& c)
{
    if (!(c.gamma > 0.0) || c.gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
    if (c.target_period == 0) throw std::invalid_argument("target period must be >= 1");
    if (c.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
    if (c.theta_samples == 0) throw std::invalid_argument("theta samples must be >= 1");
}

std::vector<Tensor> detached(const std::vector<Tensor>& src)
{
    std::vector<Tensor> out;
    out.reserve(src.size());
    for (const Tensor& t : src) out.emplace_back(t.shape(), std::vector<double>(t.values().begin(), t.values().end()));
    return out;
}

}  // namespace

GeAgent::GeAgent(std::size_t observation_dim, std::size_t num_actions, GeConfig config, Rng& init_rng)
    : config_(std::move(config)),
      head_(make_head(observation_dim, num_actions, config_)),
      optimizer_(config_.optimizer)
{
    validate(config_);
    const QMode qmode = (config_.mode == TrainMode::dqn || config_.mode == TrainMode::categorical_dirac)
                            ? QMode::dirac
                            : QMode::gaussian;
    online_ = FactorizedGaussian(init_mlp(head_.net(), init_rng), config_.rho, qmode, config_.shared_rho);
    target_ = online_;
    held_.theta = online_.mu();
}

std::vector<double> GeAgent::q_values(std::span<const double> state) const
{
    return expected_value(head_, online_.mu(), state);
}

std::size_t GeAgent::act_thompson(std::span<const double> state, Rng& theta_rng)
{
    const ParameterSample s = sample_parameters(online_, theta_rng);
    return greedy_action(head_, s.theta, state);
}

void GeAgent::resample_policy(Rng& theta_rng) { held_ = sample_parameters(online_, theta_rng); }

std::size_t GeAgent::act_held(std::span<const double> state) const { return greedy_action(head_, held_.theta, state); }

std::size_t GeAgent::act_greedy(std::span<const double> state) const { return argmax(q_values(state)); }

std::size_t GeAgent::act_epsilon_greedy(std::span<const double> state, double epsilon, Rng& action_rng) const
{
    return epsilon_greedy(q_values(state), epsilon, action_rng);
}

double GeAgent::train_on_batch(std::span<const Transition> batch, Rng& theta_rng)
{
    const ObjectiveSettings settings = objective_settings(config_.mode, head_.sigma(), config_.theta_samples);
    const EmpiricalTargets targets =
        build_target_samples(batch, target_, head_, config_.gamma, theta_rng, settings.return_noise);

    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> actions;
    rows.reserve(batch.size());
    actions.reserve(batch.size());
    for (const Transition& t : batch) {
        rows.push_back(t.state);
        actions.push_back(t.action);
    }
    const Tensor states = stack_rows(rows);
    const ObjectiveResult r =
        variational_objective(online_, head_, states, actions, targets, settings.weights, &theta_rng);

    const auto params = online_.trainable();
    optimizer_.step(params);
    ++counter_;
    if (counter_ % config_.target_period == 0) sync_target();
    return r.value;
}

std::optional<double> GeAgent::train_step(const ReplayBuffer<Transition>& buffer, Rng& replay_rng, Rng& theta_rng)
{
    if (buffer.size() < config_.batch_size) return std::nullopt;
    const auto batch = buffer.sample(config_.batch_size, replay_rng);
    return train_on_batch(batch, theta_rng);
}

void GeAgent::sync_target()
{
    target_ = online_;
    for (Tensor& t : target_.mu()) t.clear_grad();
    for (Tensor& t : target_.rho()) t.clear_grad();
}

// ---------------------------------------------------------------- DQN

DqnAgent::DqnAgent(std::size_t observation_dim, std::size_t num_actions, DqnConfig config, Rng& init_rng)
    : config_(std::move(config)),
      spec_(make_mlp_spec(observation_dim, config_.hidden, num_actions, config_.activation)),
      optimizer_(config_.optimizer)
{
    if (!(config_.gamma > 0.0) || config_.gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
    if (config_.target_period == 0 || config_.batch_size == 0)
        throw std::invalid_argument("target period and batch size must be >= 1");
    params_ = init_mlp(spec_, init_rng);
    target_ = detached(params_);
}

std::vector<double> DqnAgent::q_values(std::span<const double> state) const
{
    return mlp_forward(spec_, params_, state);
}

std::size_t DqnAgent::act(std::span<const double> state, double epsilon, Rng& action_rng) const
{
    return epsilon_greedy(q_values(state), epsilon, action_rng);
}

std::optional<double> DqnAgent::train_step(const ReplayBuffer<Transition>& buffer, Rng& replay_rng)
{
    if (buffer.size() < config_.batch_size) return std::nullopt;
    const auto batch = buffer.sample(config_.batch_size, replay_rng);

    std::vector<double> y;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> actions;
    for (const Transition& t : batch) {
        if (t.done) {
            y.push_back(t.reward);
        } else {
            const auto q_next = mlp_forward(spec_, target_, t.next_state);
            y.push_back(t.reward + config_.gamma * q_next[argmax(q_next)]);
        }
        rows.push_back(t.state);
        actions.push_back(t.action);
    }

    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& p : params_) leaves.push_back(tape.leaf(p));
    const Var q = tape.gather(mlp_forward(tape, spec_, leaves, tape.constant(stack_rows(rows))), actions);
    const Var diff = tape.subtract(q, tape.constant(Tensor::vector(std::move(y))));
    const Var loss = tape.scale(tape.sum(tape.square(diff)), 0.5);
    tape.backward(loss);

    std::vector<Tensor*> ptrs;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        params_[i].set_grad(tape.grad(leaves[i]));
        ptrs.push_back(&params_[i]);
    }
    optimizer_.step(ptrs);
    ++counter_;
    if (counter_ % config_.target_period == 0) sync_target();
    return tape.value(loss).item();
}

void DqnAgent::sync_target() { target_ = detached(params_); }

}  // namespace explore
