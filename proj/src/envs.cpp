#include "explore/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace explore {

std::string to_string(EnvId id)
{
    switch (id) {
    case EnvId::chain: return "chain";
    case EnvId::cartpole: return "cartpole";
    case EnvId::mountaincar: return "mountaincar";
    case EnvId::acrobot: return "acrobot";
    case EnvId::pendulum_continuous: return "pendulum_continuous";
    }
    return "unknown";
}

EnvId parse_env_id(const std::string& id)
{
    if (id == "chain" || id.rfind("chain(", 0) == 0 || id.rfind("chain:", 0) == 0) return EnvId::chain;
    if (id == "cartpole") return EnvId::cartpole;
    if (id == "mountaincar") return EnvId::mountaincar;
    if (id == "acrobot") return EnvId::acrobot;
    if (id == "pendulum_continuous") return EnvId::pendulum_continuous;
    throw std::invalid_argument("unknown environment '" + id + "'");
}

std::string EnvSpec::name() const
{
    if (id == EnvId::chain) return "chain(" + std::to_string(chain_length) + ")";
    return to_string(id);
}

EnvSpec make_env_spec(const std::string& id, std::size_t chain_length)
{
    EnvSpec s;
    s.id = parse_env_id(id);
    switch (s.id) {
    case EnvId::chain: {
        if (id.size() > 6) {
            std::string digits = id.substr(6);
            if (!digits.empty() && digits.back() == ')') digits.pop_back();
            try {
                std::size_t used = 0;
                chain_length = std::stoul(digits, &used);
                if (used != digits.size()) throw std::invalid_argument(digits);
            } catch (const std::exception&) {
                throw std::invalid_argument("bad chain length in '" + id + "'");
            }
        }
        if (chain_length < 3) throw std::invalid_argument("chain length must be >= 3");
        s.chain_length = chain_length;
        s.num_actions = 2;
        s.observation_dim = chain_length;
        s.max_steps = chain_length + 9;
        break;
    }
    case EnvId::cartpole:
        s.num_actions = 2;
        s.observation_dim = 4;
        s.max_steps = 200;
        break;
    case EnvId::mountaincar:
        s.num_actions = 3;
        s.observation_dim = 2;
        s.max_steps = 200;
        break;
    case EnvId::acrobot:
        s.num_actions = 3;
        s.observation_dim = 6;
        s.max_steps = 500;
        break;
    case EnvId::pendulum_continuous:
        s.discrete = false;
        s.action_dim = 1;
        s.action_low = -10.0;
        s.action_high = 10.0;
        s.observation_dim = 4;
        s.max_steps = 200;
        break;
    }
    return s;
}

StepResult Environment::step_discrete(std::size_t)
{
    throw std::invalid_argument(spec().name() + " has a continuous action space");
}

StepResult Environment::step_continuous(std::span<const double>)
{
    throw std::invalid_argument(spec().name() + " has a discrete action space");
}

void Environment::check_active() const
{
    if (!started_) throw std::logic_error("step() before reset()");
    if (done_) throw std::logic_error("episode is over; call reset() before stepping again");
}

void Environment::finish_step(StepResult& r)
{
    ++steps_;
    if (!r.done && steps_ >= spec().max_steps) {
        r.done = true;
        r.info.truncated = true;
    }
    done_ = r.done;
}

std::unique_ptr<Environment> make_environment(const EnvSpec& spec)
{
    switch (spec.id) {
    case EnvId::chain: return std::make_unique<ChainEnv>(spec.chain_length);
    case EnvId::cartpole: return std::make_unique<CartPoleEnv>(false);
    case EnvId::pendulum_continuous: return std::make_unique<CartPoleEnv>(true);
    case EnvId::mountaincar: return std::make_unique<MountainCarEnv>();
    case EnvId::acrobot: return std::make_unique<AcrobotEnv>();
    }
    throw std::invalid_argument("unknown environment");
}

// ---------------------------------------------------------------- chain

std::vector<double> chain_observation(std::size_t n, std::size_t state_index)
{
    std::vector<double> obs(n, 0.0);
    obs.at(state_index - 1) = 1.0;
    return obs;
}

StepResult chain_step(std::size_t n, std::size_t state_index, std::size_t action, std::size_t step_count)
{
    if (action > 1) throw std::invalid_argument("chain action must be 0 (left) or 1 (right)");
    if (state_index < 1 || state_index > n) throw std::out_of_range("chain state index out of range");
    if (step_count >= n + 9) throw std::logic_error("chain episode already finished");

    std::size_t next = state_index;
    if (state_index != 1 && state_index != n) next = action == 1 ? state_index + 1 : state_index - 1;

    StepResult r;
    r.reward = next == 1 ? 0.001 : (next == n ? 1.0 : 0.0);
    r.done = step_count + 1 == n + 9;
    r.info.raw_reward = r.reward;
    r.info.state_index = next;
    r.info.truncated = r.done;
    r.observation = chain_observation(n, next);
    return r;
}

ChainEnv::ChainEnv(std::size_t n) : spec_(make_env_spec("chain", n)) {}

std::vector<double> ChainEnv::reset(Rng&)
{
    begin_episode();
    state_ = 2;
    return chain_observation(spec_.chain_length, state_);
}

StepResult ChainEnv::step_discrete(std::size_t action)
{
    check_active();
    StepResult r = chain_step(spec_.chain_length, state_, action, steps());
    state_ = r.info.state_index;
    finish_step(r);
    return r;
}

// ---------------------------------------------------------------- cart-pole

namespace {

constexpr double kGravity = 9.8;
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kTotalMass = kCartMass + kPoleMass;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kPoleMass * kHalfLength;
constexpr double kForce = 10.0;
constexpr double kTau = 0.02;
constexpr double kAngleLimit = 12.0 * 2.0 * std::numbers::pi / 360.0;
constexpr double kPositionLimit = 2.4;

}  // namespace

CartPoleState cartpole_dynamics(const CartPoleState& s, double force)
{
    const double cos_t = std::cos(s.theta);
    const double sin_t = std::sin(s.theta);
    const double temp = (force + kPoleMassLength * s.theta_dot * s.theta_dot * sin_t) / kTotalMass;
    const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                             (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
    CartPoleState n;
    n.x = s.x + kTau * s.x_dot;
    n.x_dot = s.x_dot + kTau * x_acc;
    n.theta = s.theta + kTau * s.theta_dot;
    n.theta_dot = s.theta_dot + kTau * theta_acc;
    return n;
}

bool cartpole_failed(const CartPoleState& s)
{
    return s.x < -kPositionLimit || s.x > kPositionLimit || s.theta < -kAngleLimit || s.theta > kAngleLimit;
}

CartPoleEnv::CartPoleEnv(bool continuous)
    : spec_(make_env_spec(continuous ? "pendulum_continuous" : "cartpole"))
{
}

std::vector<double> CartPoleEnv::observation() const
{
    return {state_.x, state_.x_dot, state_.theta, state_.theta_dot};
}

std::vector<double> CartPoleEnv::reset(Rng& rng)
{
    begin_episode();
    state_.x = rng.uniform(-0.05, 0.05);
    state_.x_dot = rng.uniform(-0.05, 0.05);
    state_.theta = rng.uniform(-0.05, 0.05);
    state_.theta_dot = rng.uniform(-0.05, 0.05);
    return observation();
}

StepResult CartPoleEnv::advance(double force)
{
    check_active();
    state_ = cartpole_dynamics(state_, force);
    StepResult r;
    r.done = cartpole_failed(state_);
    r.reward = 1.0;
    r.info.raw_reward = r.reward;
    r.observation = observation();
    finish_step(r);
    return r;
}

StepResult CartPoleEnv::step_discrete(std::size_t action)
{
    if (spec_.id != EnvId::cartpole) return Environment::step_discrete(action);
    if (action > 1) throw std::invalid_argument("cartpole action must be 0 (push left) or 1 (push right)");
    return advance(action == 1 ? kForce : -kForce);
}

StepResult CartPoleEnv::step_continuous(std::span<const double> action)
{
    if (spec_.id != EnvId::pendulum_continuous) return Environment::step_continuous(action);
    if (action.size() != 1) throw std::invalid_argument("pendulum_continuous takes a one-dimensional action");
    if (!std::isfinite(action[0])) throw std::invalid_argument("non-finite action");
    return advance(std::clamp(action[0], spec_.action_low, spec_.action_high));
}

// ---------------------------------------------------------------- mountain car

namespace {

constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGoalPosition = 0.5;
constexpr double kCarForce = 0.001;
constexpr double kCarGravity = 0.0025;

}  // namespace

MountainCarEnv::MountainCarEnv() : spec_(make_env_spec("mountaincar")) {}

std::vector<double> MountainCarEnv::reset(Rng& rng)
{
    begin_episode();
    position_ = rng.uniform(-0.6, -0.4);
    velocity_ = 0.0;
    return {position_, velocity_};
}

StepResult MountainCarEnv::step_discrete(std::size_t action)
{
    check_active();
    if (action > 2) throw std::invalid_argument("mountaincar action must be 0, 1 or 2");
    velocity_ += (static_cast<double>(action) - 1.0) * kCarForce + std::cos(3.0 * position_) * (-kCarGravity);
    velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
    position_ += velocity_;
    position_ = std::clamp(position_, kMinPosition, kMaxPosition);
    if (position_ == kMinPosition && velocity_ < 0.0) velocity_ = 0.0;

    StepResult r;
    r.done = position_ >= kGoalPosition;
    r.reward = -1.0;
    r.info.raw_reward = r.reward;
    r.observation = {position_, velocity_};
    finish_step(r);
    return r;
}

// ---------------------------------------------------------------- acrobot

namespace {

constexpr double kLinkLength1 = 1.0;
constexpr double kLinkMass1 = 1.0;
constexpr double kLinkMass2 = 1.0;
constexpr double kLinkCom1 = 0.5;
constexpr double kLinkCom2 = 0.5;
constexpr double kLinkMoi = 1.0;
constexpr double kMaxVel1 = 4.0 * std::numbers::pi;
constexpr double kMaxVel2 = 9.0 * std::numbers::pi;
constexpr double kAcrobotDt = 0.2;

using AcroState = std::array<double, 5>;  // theta1, theta2, dtheta1, dtheta2, torque

AcroState acrobot_derivative(const AcroState& s)
{
    const double m1 = kLinkMass1, m2 = kLinkMass2, l1 = kLinkLength1;
    const double lc1 = kLinkCom1, lc2 = kLinkCom2, i1 = kLinkMoi, i2 = kLinkMoi, g = 9.8;
    const double a = s[4];
    const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
    const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
    const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - std::numbers::pi / 2.0);
    const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                        2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - std::numbers::pi / 2.0) + phi2;
    const double ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
                            (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0};
}

AcroState rk4(const AcroState& y0, double dt)
{
    auto axpy = [](const AcroState& y, const AcroState& k, double h) {
        AcroState r{};
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] + h * k[i];
        return r;
    };
    const AcroState k1 = acrobot_derivative(y0);
    const AcroState k2 = acrobot_derivative(axpy(y0, k1, dt / 2.0));
    const AcroState k3 = acrobot_derivative(axpy(y0, k2, dt / 2.0));
    const AcroState k4 = acrobot_derivative(axpy(y0, k3, dt));
    AcroState y{};
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = y0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return y;
}

double wrap_angle(double x)
{
    const double two_pi = 2.0 * std::numbers::pi;
    while (x > std::numbers::pi) x -= two_pi;
    while (x < -std::numbers::pi) x += two_pi;
    return x;
}

}  // namespace

AcrobotEnv::AcrobotEnv() : spec_(make_env_spec("acrobot")) {}

std::vector<double> AcrobotEnv::observation() const
{
    return {std::cos(state_[0]), std::sin(state_[0]), std::cos(state_[1]), std::sin(state_[1]), state_[2], state_[3]};
}

std::vector<double> AcrobotEnv::reset(Rng& rng)
{
    begin_episode();
    for (double& v : state_) v = rng.uniform(-0.1, 0.1);
    return observation();
}

StepResult AcrobotEnv::step_discrete(std::size_t action)
{
    check_active();
    if (action > 2) throw std::invalid_argument("acrobot action must be 0, 1 or 2");
    const double torque = static_cast<double>(action) - 1.0;
    const AcroState y = rk4({state_[0], state_[1], state_[2], state_[3], torque}, kAcrobotDt);
    state_[0] = wrap_angle(y[0]);
    state_[1] = wrap_angle(y[1]);
    state_[2] = std::clamp(y[2], -kMaxVel1, kMaxVel1);
    state_[3] = std::clamp(y[3], -kMaxVel2, kMaxVel2);

    StepResult r;
    r.done = -std::cos(state_[0]) - std::cos(state_[1] + state_[0]) > 1.0;
    r.reward = r.done ? 0.0 : -1.0;
    r.info.raw_reward = r.reward;
    r.observation = observation();
    finish_step(r);
    return r;
}

// ---------------------------------------------------------------- sparse rewards

StepResult sparsify(EnvId id, StepResult raw)
{
    const bool terminated = raw.done && !raw.info.truncated;
    raw.info.raw_reward = raw.reward;
    switch (id) {
    case EnvId::mountaincar:
    case EnvId::acrobot: raw.reward = terminated ? 1.0 : 0.0; break;
    case EnvId::cartpole:
    case EnvId::pendulum_continuous: raw.reward = terminated ? -1.0 : 0.0; break;
    case EnvId::chain: throw std::invalid_argument("chain has no sparse-reward variant");
    }
    return raw;
}

}  // namespace explore
